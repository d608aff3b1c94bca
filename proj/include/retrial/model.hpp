#pragma once
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "retrial/dist.hpp"

namespace retrial {

struct InstabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Arrival rates, retrial rates and the three service laws.
/// b1/b2 serve successful retrials of class 1/2, b3 serves primary arrivals found the server idle.
struct SystemParams {
    double lambda1 = 0.0, lambda2 = 0.0;
    double theta1 = 0.0, theta2 = 0.0;
    ServiceDist b1 = ServiceDist::exponential(1.0);
    ServiceDist b2 = ServiceDist::exponential(1.0);
    ServiceDist b3 = ServiceDist::exponential(1.0);
    // Degenerate one-orbit system (lambda2 = 0); analytic two-orbit operations reject it.
    bool single_class = false;

    double lambda() const { return lambda1 + lambda2; }
    double theta() const { return theta1 + theta2; }
    double r1() const { return lambda1 / lambda(); }
    double r2() const { return lambda2 / lambda(); }

    void validate() const {
        auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
        if (!pos(lambda1) || !pos(theta1)) throw std::invalid_argument("lambda1 and theta1 must be positive");
        if (single_class) {
            if (lambda2 != 0.0) throw std::invalid_argument("single-class mode requires lambda2 = 0");
        } else if (!pos(lambda2) || !pos(theta2)) {
            throw std::invalid_argument("lambda2 and theta2 must be positive (use single_class for lambda2 = 0)");
        }
    }

    void require_two_class() const {
        validate();
        if (single_class) throw std::invalid_argument("operation requires the two-orbit model");
    }

    static SystemParams symmetric(double lambda, double theta, const ServiceDist& b, const ServiceDist& b3) {
        SystemParams p;
        p.lambda1 = p.lambda2 = lambda / 2;
        p.theta1 = p.theta2 = theta / 2;
        p.b1 = p.b2 = b;
        p.b3 = b3;
        return p;
    }
};

/// Expected class-j joiners per unit of class-j retrial success effort:
/// rho_hat_j = lambda_j (theta1 b1 + theta2 b2 + lambda b3) / theta_j.
inline double rho_hat(const SystemParams& p, int j) {
    p.validate();
    const double work = p.theta1 * p.b1.moment(1) + (p.single_class ? 0.0 : p.theta2 * p.b2.moment(1)) + p.lambda() * p.b3.moment(1);
    if (j == 1) return p.lambda1 * work / p.theta1;
    if (j == 2) return p.single_class ? 0.0 : p.lambda2 * work / p.theta2;
    throw std::invalid_argument("rho_hat: j must be 1 or 2");
}

inline bool is_stable(const SystemParams& p) { return std::max(rho_hat(p, 1), rho_hat(p, 2)) < 1.0; }

enum class RegimeTag { CompletelySymmetric, ModifiedSymmetric, Asymmetric };

inline const char* to_string(RegimeTag t) {
    switch (t) {
    case RegimeTag::CompletelySymmetric: return "completely-symmetric";
    case RegimeTag::ModifiedSymmetric: return "modified-symmetric";
    case RegimeTag::Asymmetric: return "asymmetric";
    }
    return "?";
}

inline RegimeTag classify(const SystemParams& p, double tol = 1e-12) {
    if (p.single_class) return RegimeTag::Asymmetric;
    auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); };
    if (!close(p.lambda1, p.lambda2) || !close(p.theta1, p.theta2) || !p.b1.equals(p.b2, tol)) return RegimeTag::Asymmetric;
    return p.b1.equals(p.b3, tol) ? RegimeTag::CompletelySymmetric : RegimeTag::ModifiedSymmetric;
}

inline bool is_symmetric(RegimeTag t) { return t != RegimeTag::Asymmetric; }

/// Coefficients of the two linear relations between Pi(1,0), Pi(0,1), Pi(0,0):
/// rhs[i] = a[i][0] Pi(1,0) + a[i][1] Pi(0,1) + a[i][2] Pi(0,0).
struct LinearRelations {
    std::array<std::array<double, 3>, 2> a{};
    std::array<double, 2> rhs{};
};

inline LinearRelations boundary_relations(const SystemParams& p) {
    p.require_two_class();
    const double l1 = p.lambda1, l2 = p.lambda2, t1 = p.theta1, t2 = p.theta2, lam = p.lambda();
    const double m1 = p.b1.moment(1), m2 = p.b2.moment(1), m3 = p.b3.moment(1);
    LinearRelations r;
    r.rhs[0] = 1.0 - rho_hat(p, 2);
    r.a[0][0] = (lam + t1 + l2 * (lam * (m3 - m2) + t1 * (m1 - m2))) / (lam + t1);
    r.a[0][1] = (t1 / t2) * ((l2 * (lam * (m3 - m1) + t2 * (m2 - m1)) - t2) / (lam + t2));
    r.a[0][2] = t1 * (l2 * (m3 - m1) / (lam + t1) + (1.0 + l2 * (m3 - m2)) / (lam + t2));
    r.rhs[1] = 1.0 - rho_hat(p, 1);
    r.a[1][0] = (t2 / t1) * ((l1 * (lam * (m3 - m2) + t1 * (m1 - m2)) - t1) / (lam + t1));
    r.a[1][1] = (lam + t2 + l1 * (lam * (m3 - m1) + t2 * (m2 - m1))) / (lam + t2);
    r.a[1][2] = t2 * (l1 * (m3 - m2) / (lam + t2) + (1.0 + l1 * (m3 - m1)) / (lam + t1));
    return r;
}

/// LHS - RHS of each relation (relation written with 1 - rho_hat on the left).
inline std::array<double, 2> boundary_relations_residual(const SystemParams& p, double pi10, double pi01, double pi00) {
    const auto r = boundary_relations(p);
    std::array<double, 2> res{};
    for (int i = 0; i < 2; ++i) res[i] = r.rhs[i] - (r.a[i][0] * pi10 + r.a[i][1] * pi01 + r.a[i][2] * pi00);
    return res;
}

/// Symmetric reduction 2 lambda Pi(1,0) + theta Pi(0,0) = (1 - rho_hat)(2 lambda + theta)/(1 + lambda(b3 - b)).
inline double symmetric_identity_rhs(const SystemParams& p) {
    const double lam = p.lambda(), th = p.theta();
    return (1.0 - rho_hat(p, 1)) * (2 * lam + th) / (1.0 + lam * (p.b3.moment(1) - p.b1.moment(1)));
}

inline double symmetric_identity_residual(const SystemParams& p, double pi10, double pi00) {
    return 2 * p.lambda() * pi10 + p.theta() * pi00 - symmetric_identity_rhs(p);
}

// rho of the completely symmetric closed form: (lambda/2) b
inline double symmetric_rho(const SystemParams& p) { return p.lambda() / 2 * p.b1.moment(1); }

inline void require_completely_symmetric(const SystemParams& p) {
    if (classify(p) != RegimeTag::CompletelySymmetric)
        throw std::invalid_argument("closed form needs the completely symmetric regime");
}

/// Departure-epoch mean size of one orbit, completely symmetric model.
inline double symmetric_mean_orbit(const SystemParams& p) {
    require_completely_symmetric(p);
    const double lam = p.lambda(), th = p.theta(), rho = symmetric_rho(p), b2 = p.b1.moment(2);
    const double den = th - 2 * rho * (lam + th);
    if (!(den > 0.0)) throw InstabilityError("symmetric closed form: theta - 2 rho (lambda + theta) <= 0");
    return (4 * rho * (2 * lam + th - 2 * rho * (lam + th)) + lam * lam * b2 * (lam + th)) / (4 * den);
}

/// Mean orbit sojourn, completely symmetric model; evaluated from its own expression.
inline double symmetric_expected_delay(const SystemParams& p) {
    require_completely_symmetric(p);
    const double lam = p.lambda(), th = p.theta(), b = p.b1.moment(1), b2 = p.b1.moment(2);
    const double rho = lam * b / 2;
    const double den = 2 * lam * (th - 2 * rho * (lam + th));
    if (!(den > 0.0)) throw InstabilityError("symmetric closed form: theta - 2 rho (lambda + theta) <= 0");
    return (4 * rho * (2 * lam + th - 2 * rho * (lam + th)) + lam * lam * b2 * (lam + th)) / den;
}

/// Strict key = value parser. Keys: lambda1 lambda2 theta1 theta2 b1 b2 b3 [single_class].
inline SystemParams parse_config(std::istream& in, const std::string& origin = "<config>") {
    static const std::array<const char*, 7> required = {"lambda1", "lambda2", "theta1", "theta2", "b1", "b2", "b3"};
    std::map<std::string, std::pair<std::string, int>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        bool known = key == "single_class";
        for (auto* r : required) known = known || key == r;
        if (!known) throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (kv.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        if (val.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty value for '" + key + "'");
        kv[key] = {val, lineno};
    }
    for (auto* r : required)
        if (!kv.count(r)) throw ConfigError(origin + ": missing key '" + std::string(r) + "'");

    auto num = [&](const char* k) {
        try {
            return detail::parse_number(kv[k].first);
        } catch (const std::exception& e) {
            throw ConfigError(origin + ":" + std::to_string(kv[k].second) + ": " + e.what());
        }
    };
    auto dist = [&](const char* k) {
        try {
            return parse_dist(kv[k].first);
        } catch (const std::exception& e) {
            throw ConfigError(origin + ":" + std::to_string(kv[k].second) + ": " + e.what());
        }
    };
    SystemParams p;
    p.lambda1 = num("lambda1");
    p.lambda2 = num("lambda2");
    p.theta1 = num("theta1");
    p.theta2 = num("theta2");
    p.b1 = dist("b1");
    p.b2 = dist("b2");
    p.b3 = dist("b3");
    if (kv.count("single_class")) {
        const auto& v = kv["single_class"].first;
        if (v == "true" || v == "1") p.single_class = true;
        else if (v == "false" || v == "0") p.single_class = false;
        else throw ConfigError(origin + ":" + std::to_string(kv["single_class"].second) + ": single_class must be true/false");
    }
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return p;
}

inline SystemParams load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path + "'");
    return parse_config(f, path);
}

inline std::string to_config(const SystemParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda1 = " << p.lambda1 << "\nlambda2 = " << p.lambda2 << "\ntheta1 = " << p.theta1 << "\ntheta2 = " << p.theta2
       << "\nb1 = " << p.b1.to_string() << "\nb2 = " << p.b2.to_string() << "\nb3 = " << p.b3.to_string() << "\n";
    if (p.single_class) os << "single_class = true\n";
    return os.str();
}

} // namespace retrial
