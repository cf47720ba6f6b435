#pragma once

// Model definition: the double-well potential F (with reaction f = F'), the
// damping coefficient g(u,tau), and the scalar constants derived from them by
// quadrature.  Built-in families:
//   quartic     F(u) = (1-u^2)^2/4
//   asymmetric  F_a(u) = (1-u^2)^2 (1+a u)/4,  |a|<1
//   custom      polynomial coefficients for F
// All values are immutable after construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"

#include "json.hpp"

namespace layerdyn {

// ---------------------------------------------------------------------------
// Polynomial with ascending coefficients.
struct Polynomial {
  std::vector<double> c;

  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
  }

  Polynomial derivative() const {
    if (c.size() <= 1) return {{0.0}};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * double(i);
    return {d};
  }

  // q(t) = p(x0 + t), by synthetic-division Taylor shift.
  Polynomial shifted(double x0) const {
    std::vector<double> a = c;
    const int n = static_cast<int>(a.size());
    for (int i = 0; i < n; ++i)
      for (int j = n - 2; j >= i; --j) a[j] += x0 * a[j + 1];
    return {a};
  }

  // q(t) = p(-t).
  Polynomial reflected() const {
    std::vector<double> a = c;
    for (std::size_t i = 1; i < a.size(); i += 2) a[i] = -a[i];
    return {a};
  }
};

enum class PotentialFamily { quartic, asymmetric, custom };

struct ModelValues {
  double F, f, fp, fpp;  // F, F', F'', F'''
};

// ---------------------------------------------------------------------------
class PotentialSpec {
 public:
  static PotentialSpec quartic() {
    return PotentialSpec(PotentialFamily::quartic, 0.0,
                         {{0.25, 0.0, -0.5, 0.0, 0.25}});
  }

  static PotentialSpec asymmetric(double a) {
    if (!(std::abs(a) < 1.0))
      throw DomainError("asymmetric potential requires |a| < 1");
    return PotentialSpec(PotentialFamily::asymmetric, a,
                         {{0.25, 0.25 * a, -0.5, -0.5 * a, 0.25, 0.25 * a}});
  }

  static PotentialSpec custom(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs = {0.0};
    return PotentialSpec(PotentialFamily::custom, 0.0, {std::move(coeffs)});
  }

  PotentialFamily family() const { return family_; }
  double asymmetry() const { return a_; }
  const Polynomial& poly() const { return F_; }

  double F(double u) const { return F_(u); }
  double f(double u) const { return f_(u); }    // F'
  double fp(double u) const { return fp_(u); }  // F''
  double fpp(double u) const { return fpp_(u); }

  // Well polynomials S_+(b) = F(1-b) and S_-(b) = F(-1+b), with the two
  // leading coefficients (which vanish for a genuine double well) zeroed so
  // that S(b) = b^2 T(b) holds exactly at tiny b.
  const Polynomial& well(bool plus_branch) const {
    return plus_branch ? well_plus_ : well_minus_;
  }
  bool wells_clean() const { return wells_clean_; }

  // Stable key used by caches; encodes the exact coefficients.
  const std::string& key() const { return key_; }

  bool operator==(const PotentialSpec& o) const { return key_ == o.key_; }

 private:
  PotentialSpec(PotentialFamily fam, double a, Polynomial F)
      : family_(fam), a_(a), F_(std::move(F)) {
    f_ = F_.derivative();
    fp_ = f_.derivative();
    fpp_ = fp_.derivative();
    well_plus_ = F_.shifted(1.0).reflected();
    well_minus_ = F_.shifted(-1.0);
    wells_clean_ = true;
    for (Polynomial* w : {&well_plus_, &well_minus_}) {
      if (w->c.size() < 3) {
        wells_clean_ = false;
        continue;
      }
      if (std::abs(w->c[0]) <= 1e-12 && std::abs(w->c[1]) <= 1e-12) {
        w->c[0] = 0.0;
        w->c[1] = 0.0;
      } else {
        wells_clean_ = false;
      }
    }
    std::ostringstream os;
    os.precision(17);
    os << static_cast<int>(family_) << ':';
    for (double v : F_.c) os << v << ',';
    key_ = os.str();
  }

  PotentialFamily family_;
  double a_;
  Polynomial F_, f_, fp_, fpp_;
  Polynomial well_plus_, well_minus_;
  bool wells_clean_ = false;
  std::string key_;
};

inline ModelValues eval_model(const PotentialSpec& spec, double u) {
  return {spec.F(u), spec.f(u), spec.fp(u), spec.fpp(u)};
}

// ---------------------------------------------------------------------------
struct ValidationItem {
  std::string name;
  bool pass;
  double measured;  // residual or value, per item
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool all_pass = true;

  void add(std::string name, bool pass, double measured) {
    all_pass = all_pass && pass;
    items.push_back({std::move(name), pass, measured});
  }
};

// Checks the double-well conditions; returns a failing report rather than
// throwing for bad input.
inline ValidationReport validate_double_well(const PotentialSpec& spec) {
  ValidationReport rep;
  const double tol = 1e-12;
  rep.add("F(+1)=0", std::abs(spec.F(1.0)) <= tol, spec.F(1.0));
  rep.add("F(-1)=0", std::abs(spec.F(-1.0)) <= tol, spec.F(-1.0));
  rep.add("F'(+1)=0", std::abs(spec.f(1.0)) <= tol, spec.f(1.0));
  rep.add("F'(-1)=0", std::abs(spec.f(-1.0)) <= tol, spec.f(-1.0));
  rep.add("F''(+1)>0", spec.fp(1.0) > 0.0, spec.fp(1.0));
  rep.add("F''(-1)>0", spec.fp(-1.0) > 0.0, spec.fp(-1.0));
  // Positivity on a sampled interior grid (cell midpoints, away from +-1).
  const int n = 4096;
  double fmin = 1e300, umin = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = -1.0 + 2.0 * (i + 0.5) / n;
    const double v = spec.F(u);
    if (v < fmin) {
      fmin = v;
      umin = u;
    }
  }
  (void)umin;
  rep.add("F>0 on (-1,1)", fmin > 0.0, fmin);
  return rep;
}

// ---------------------------------------------------------------------------
enum class DampingFamily { constant_one, relaxation, table };

struct DampingSpec {
  DampingFamily family = DampingFamily::constant_one;
  std::vector<double> table_u, table_g;

  static DampingSpec one() { return {}; }
  static DampingSpec relaxation() { return {DampingFamily::relaxation, {}, {}}; }
  static DampingSpec tabulated(std::vector<double> u, std::vector<double> g) {
    if (u.size() != g.size() || u.size() < 2)
      throw DomainError("damping table needs matching u/g arrays, size >= 2");
    return {DampingFamily::table, std::move(u), std::move(g)};
  }

  double eval(const PotentialSpec& pot, double u, double tau) const {
    switch (family) {
      case DampingFamily::constant_one:
        return 1.0;
      case DampingFamily::relaxation:
        return 1.0 + tau * pot.fp(u);
      case DampingFamily::table: {
        if (u <= table_u.front()) return table_g.front();
        if (u >= table_u.back()) return table_g.back();
        auto it = std::upper_bound(table_u.begin(), table_u.end(), u);
        const std::size_t i = it - table_u.begin();
        const double t = (u - table_u[i - 1]) / (table_u[i] - table_u[i - 1]);
        return table_g[i - 1] + t * (table_g[i] - table_g[i - 1]);
      }
    }
    return 1.0;
  }
};

// Measured positivity floor of g over u in [-1.5, 1.5] (1e4 samples).  The
// floor is a per-(g,tau) measurement, not a declared constant.
inline double damping_floor(const DampingSpec& g, const PotentialSpec& pot,
                            double tau) {
  const int n = 10000;
  double lo = 1e300;
  for (int i = 0; i < n; ++i) {
    const double u = -1.5 + 3.0 * i / (n - 1);
    lo = std::min(lo, g.eval(pot, u, tau));
  }
  return lo;
}

inline double damping_max(const DampingSpec& g, const PotentialSpec& pot,
                          double tau) {
  const int n = 10000;
  double hi = -1e300;
  for (int i = 0; i < n; ++i) {
    const double u = -1.5 + 3.0 * i / (n - 1);
    hi = std::max(hi, g.eval(pot, u, tau));
  }
  return hi;
}

// Throws if the measured floor is not strictly positive.
inline double validate_damping(const DampingSpec& g, const PotentialSpec& pot,
                               double tau) {
  const double cg = damping_floor(g, pot, tau);
  if (!(cg > 0.0)) {
    std::ostringstream os;
    os << "damping floor not positive: c_g = " << cg << " at tau = " << tau;
    throw DomainError(os.str());
  }
  return cg;
}

// ---------------------------------------------------------------------------
struct ModelParams {
  double eps = 0.03;   // interface width
  double tau = 0.1;    // relaxation time, >= 0
  int N = 2;           // layer count
  double delta = 0.05; // minimal spacing
  double rho = 0.3;    // spacing parameter
  double Gamma = 0.0;  // channel width; <= 0 requests calibration

  void validate() const {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    if (!(tau >= 0.0)) throw DomainError("tau must be nonnegative");
    if (N < 1) throw DomainError("N must be >= 1");
    if (!(delta > 0.0 && delta < 1.0 / N))
      throw DomainError("delta must lie in (0, 1/N)");
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
    if (!(delta < eps / rho && eps / rho < 1.0 / N))
      throw DomainError("spacing condition delta < eps/rho < 1/N violated");
  }
};

// ---------------------------------------------------------------------------
// Quadrature-derived constants.

// (1/||sqrt(F)||_L1) * int_{-1}^{1} sqrt(F) g du, for a raw callable g.
template <class G>
double weighted_average_fn(const PotentialSpec& spec, G&& g, double rtol = 1e-11) {
  auto sqF = [&](double u) { return std::sqrt(std::max(0.0, spec.F(u))); };
  const double den =
      tanh_sinh_or_throw([&](double u) { return sqF(u); }, -1.0, 1.0, rtol,
                         0.0, "||sqrt(F)||_L1");
  const double num = tanh_sinh_or_throw(
      [&](double u) { return sqF(u) * g(u); }, -1.0, 1.0, rtol, den * rtol,
      "sqrt(F)*g average");
  return num / den;
}

inline double weighted_average(const PotentialSpec& spec, const DampingSpec& g,
                               double tau, double rtol = 1e-11) {
  return weighted_average_fn(
      spec, [&](double u) { return g.eval(spec, u, tau); }, rtol);
}

// D_infinity = int_{-1}^{1} sqrt(2 F) du.
inline double d_infinity(const PotentialSpec& spec, double rtol = 1e-11) {
  return tanh_sinh_or_throw(
      [&](double u) { return std::sqrt(std::max(0.0, 2.0 * spec.F(u))); },
      -1.0, 1.0, rtol, 0.0, "D_infinity");
}

// gamma_tau = int sqrt(2F) g / int sqrt(2F).  Computed by two algebraic
// routes that must agree to 1e-10 relative.
inline double gamma_tau(const PotentialSpec& spec, const DampingSpec& g,
                        double tau) {
  const double rtol = 1e-12;
  auto sqF = [&](double u) { return std::sqrt(std::max(0.0, spec.F(u))); };
  const double dinf = d_infinity(spec, rtol);
  const double norm1 =
      tanh_sinh_or_throw([&](double u) { return sqF(u); }, -1.0, 1.0, rtol,
                         0.0, "||sqrt(F)||_L1");
  const double avg = weighted_average(spec, g, tau, rtol);
  const double route_a = avg * std::sqrt(2.0) * norm1 / dinf;
  const double route_b =
      tanh_sinh_or_throw(
          [&](double u) {
            return std::sqrt(std::max(0.0, 2.0 * spec.F(u))) *
                   g.eval(spec, u, tau);
          },
          -1.0, 1.0, rtol, dinf * rtol, "int sqrt(2F) g") /
      dinf;
  if (std::abs(route_a - route_b) > 1e-10 * std::max(1.0, std::abs(route_b)))
    throw NumericalError("gamma_tau: quadrature routes disagree beyond 1e-10");
  return route_b;
}

// ---------------------------------------------------------------------------
// JSON serialization.
//   {"family":"quartic"} | {"family":"asymmetric","a":..} |
//   {"family":"custom","coeffs":[..]}
inline nlohmann::json to_json(const PotentialSpec& spec) {
  switch (spec.family()) {
    case PotentialFamily::quartic:
      return {{"family", "quartic"}};
    case PotentialFamily::asymmetric:
      return {{"family", "asymmetric"}, {"a", spec.asymmetry()}};
    case PotentialFamily::custom:
      return {{"family", "custom"}, {"coeffs", spec.poly().c}};
  }
  return {};
}

inline PotentialSpec potential_from_json(const nlohmann::json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "quartic") return PotentialSpec::quartic();
  if (fam == "asymmetric") return PotentialSpec::asymmetric(j.at("a").get<double>());
  if (fam == "custom")
    return PotentialSpec::custom(j.at("coeffs").get<std::vector<double>>());
  throw ConfigError("unknown potential family: " + fam);
}

//   {"family":"one"} | {"family":"relaxation"} |
//   {"family":"table","u":[..],"g":[..]}
inline nlohmann::json to_json(const DampingSpec& g) {
  switch (g.family) {
    case DampingFamily::constant_one:
      return {{"family", "one"}};
    case DampingFamily::relaxation:
      return {{"family", "relaxation"}};
    case DampingFamily::table:
      return {{"family", "table"}, {"u", g.table_u}, {"g", g.table_g}};
  }
  return {};
}

inline DampingSpec damping_from_json(const nlohmann::json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "one") return DampingSpec::one();
  if (fam == "relaxation") return DampingSpec::relaxation();
  if (fam == "table")
    return DampingSpec::tabulated(j.at("u").get<std::vector<double>>(),
                                  j.at("g").get<std::vector<double>>());
  throw ConfigError("unknown damping family: " + fam);
}

inline nlohmann::json to_json(const ValidationReport& rep) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : rep.items)
    items.push_back(
        {{"name", it.name}, {"pass", it.pass}, {"measured", it.measured}});
  return {{"all_pass", rep.all_pass}, {"items", items}};
}

}  // namespace layerdyn
