#pragma once
#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "retrial/rng.hpp"

namespace retrial {

using cplx = std::complex<double>;

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

enum class DistKind { Exponential, Erlang, Deterministic, HyperExponential };

/// Service-time law with closed-form LST.
/// Immutable after construction; sampling takes the caller's stream.
class ServiceDist {
public:
    static ServiceDist exponential(double rate) { return ServiceDist(DistKind::Exponential, 1, {1.0}, {rate}, 0.0); }
    static ServiceDist erlang(int shape, double rate) { return ServiceDist(DistKind::Erlang, shape, {1.0}, {rate}, 0.0); }
    static ServiceDist deterministic(double value) { return ServiceDist(DistKind::Deterministic, 1, {}, {}, value); }
    static ServiceDist hyperexponential(std::vector<double> probs, std::vector<double> rates) {
        return ServiceDist(DistKind::HyperExponential, 1, std::move(probs), std::move(rates), 0.0);
    }

    DistKind kind() const { return kind_; }
    int shape() const { return shape_; }
    const std::vector<double>& probs() const { return probs_; }
    const std::vector<double>& rates() const { return rates_; }
    double value() const { return value_; }

    /// E[e^{-sB}]; requires Re(s) >= 0.
    cplx lst(cplx s) const {
        if (s.real() < -1e-12) throw DomainError("lst: Re(s) < 0");
        return lst_unchecked(s);
    }

    // Used on contours where Re(s) may dip below zero by rounding only.
    cplx lst_unchecked(cplx s) const {
        switch (kind_) {
        case DistKind::Exponential: return rates_[0] / (rates_[0] + s);
        case DistKind::Erlang: return std::pow(rates_[0] / (rates_[0] + s), shape_);
        case DistKind::Deterministic: return std::exp(-s * value_);
        case DistKind::HyperExponential: {
            cplx r = 0.0;
            for (std::size_t i = 0; i < rates_.size(); ++i) r += probs_[i] * rates_[i] / (rates_[i] + s);
            return r;
        }
        }
        return 0.0;
    }

    double lst(double s) const { return lst(cplx(s, 0.0)).real(); }

    /// Raw moment E[B^k], k in {1,2}.
    double moment(int k) const {
        if (k != 1 && k != 2) throw std::invalid_argument("moment: k must be 1 or 2");
        switch (kind_) {
        case DistKind::Exponential: return k == 1 ? 1.0 / rates_[0] : 2.0 / (rates_[0] * rates_[0]);
        case DistKind::Erlang: {
            const double n = shape_, mu = rates_[0];
            return k == 1 ? n / mu : n * (n + 1) / (mu * mu);
        }
        case DistKind::Deterministic: return k == 1 ? value_ : value_ * value_;
        case DistKind::HyperExponential: {
            double m = 0.0;
            for (std::size_t i = 0; i < rates_.size(); ++i)
                m += probs_[i] * (k == 1 ? 1.0 / rates_[i] : 2.0 / (rates_[i] * rates_[i]));
            return m;
        }
        }
        return 0.0;
    }

    double sample(RandomStream& rng) const {
        switch (kind_) {
        case DistKind::Exponential: return rng.exponential(rates_[0]);
        case DistKind::Erlang: {
            double t = 0.0;
            for (int i = 0; i < shape_; ++i) t += rng.exponential(rates_[0]);
            return t;
        }
        case DistKind::Deterministic: return value_;
        case DistKind::HyperExponential: {
            double u = rng.uniform(), acc = 0.0;
            std::size_t i = 0;
            for (; i + 1 < probs_.size(); ++i) {
                acc += probs_[i];
                if (u < acc) break;
            }
            return rng.exponential(rates_[i]);
        }
        }
        return 0.0;
    }

    /// Same kind and parameters within relative tolerance.
    bool equals(const ServiceDist& o, double tol = 1e-12) const {
        auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); };
        if (kind_ != o.kind_ || shape_ != o.shape_ || rates_.size() != o.rates_.size()) return false;
        if (!close(value_, o.value_)) return false;
        for (std::size_t i = 0; i < rates_.size(); ++i)
            if (!close(rates_[i], o.rates_[i]) || !close(probs_[i], o.probs_[i])) return false;
        return true;
    }

    std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        switch (kind_) {
        case DistKind::Exponential: os << "exp:" << rates_[0]; break;
        case DistKind::Erlang: os << "erlang:" << shape_ << ":" << rates_[0]; break;
        case DistKind::Deterministic: os << "det:" << value_; break;
        case DistKind::HyperExponential:
            os << "hyper:";
            for (std::size_t i = 0; i < rates_.size(); ++i) os << (i ? ";" : "") << probs_[i] << "," << rates_[i];
            break;
        }
        return os.str();
    }

private:
    ServiceDist(DistKind k, int shape, std::vector<double> probs, std::vector<double> rates, double value)
        : kind_(k), shape_(shape), probs_(std::move(probs)), rates_(std::move(rates)), value_(value) {
        for (double r : rates_)
            if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("service rate must be positive");
        if (shape_ < 1) throw std::invalid_argument("Erlang shape must be >= 1");
        if (kind_ == DistKind::Deterministic && !(value_ >= 0.0)) throw std::invalid_argument("deterministic value must be nonnegative");
        if (kind_ == DistKind::HyperExponential) {
            if (probs_.empty() || probs_.size() != rates_.size()) throw std::invalid_argument("hyper: probs/rates size mismatch");
            for (double p : probs_)
                if (p < 0.0) throw std::invalid_argument("hyper: negative probability");
            if (std::abs(std::accumulate(probs_.begin(), probs_.end(), 0.0) - 1.0) > 1e-12)
                throw std::invalid_argument("hyper: probabilities must sum to 1");
        }
    }

    DistKind kind_;
    int shape_;
    std::vector<double> probs_;
    std::vector<double> rates_;
    double value_;
};

namespace detail {
inline double parse_number(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("trailing characters in number: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
} // namespace detail

/// Grammar: exp:rate | erlang:shape:rate | det:value | hyper:p1,rate1;p2,rate2
inline ServiceDist parse_dist(const std::string& text) {
    std::string s;
    for (char c : detail::trim(text))
        if (c != ' ' && c != '\t') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto parts = detail::split(s, ':');
    const std::string& kind = parts[0];
    if (kind == "exp" && parts.size() == 2) return ServiceDist::exponential(detail::parse_number(parts[1]));
    if (kind == "erlang" && parts.size() == 3) {
        double k = detail::parse_number(parts[1]);
        if (k < 1 || std::floor(k) != k) throw std::invalid_argument("erlang shape must be a positive integer");
        return ServiceDist::erlang(static_cast<int>(k), detail::parse_number(parts[2]));
    }
    if (kind == "det" && parts.size() == 2) return ServiceDist::deterministic(detail::parse_number(parts[1]));
    if (kind == "hyper" && parts.size() == 2) {
        std::vector<double> p, r;
        for (const auto& branch : detail::split(parts[1], ';')) {
            auto pr = detail::split(branch, ',');
            if (pr.size() != 2) throw std::invalid_argument("hyper branch must be 'p,rate': '" + branch + "'");
            p.push_back(detail::parse_number(pr[0]));
            r.push_back(detail::parse_number(pr[1]));
        }
        return ServiceDist::hyperexponential(p, r);
    }
    throw std::invalid_argument("unrecognized distribution: '" + text + "'");
}

} // namespace retrial
