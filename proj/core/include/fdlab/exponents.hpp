#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fdlab {

/// Exact rational number used for the diffusion exponent m when it is given
/// in closed form ("0", "1/4", "-0.5"). Always normalized: den > 0, gcd = 1.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  /// Parses "p/q", an integer, or a terminating decimal ("0.25", "-1e-1").
  static std::optional<Rational> parse(std::string_view text);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Every exponent derived from (n, m). Constructing one through
/// derive_exponents() is the single validity gate for the regime
/// n > 2, m < m_star that all other modules rely on.
struct ExponentSet {
  int n = 0;
  double m = 0.0;
  double mu = 0.0;          // 2/(1-m), tail exponent of V_D
  double beta = 0.0;        // 1/(n(1-m)-2)
  double m_c = 0.0;         // (n-2)/n
  double m_star = 0.0;      // (n-4)/(n-2)
  double l_star = 0.0;      // (n+mu+2)/2
  double alpha_star = 0.0;  // (n-mu-2)^2/4
  std::optional<Rational> m_exact;

  /// mu + 2, the lower end of the admissible tail exponents.
  double l_min() const { return mu + 2.0; }
  /// Singular-profile constant k_* = (2(n-mu))^{mu/2}; used for labels only.
  double k_star() const;
};

/// Throws PreconditionError naming the violated bound when n <= 2 or
/// m >= m_star.
ExponentSet derive_exponents(int n, double m);
ExponentSet derive_exponents(int n, const Rational& m);

/// Profile V_D(r) = (D + r^2)^{-mu/2}; D = 0 is the singular profile r^{-mu}.
struct ProfileSpec {
  double D = 1.0;
  ExponentSet exps;
};

double profile_value(const ProfileSpec& p, double r);

/// (l - mu - 2)(n - l) for l in (mu+2, l_star].
double rate_of_l(double l, const ExponentSet& exps);
/// Smaller root of (l - mu - 2)(n - l) = alpha for alpha in (0, alpha_star].
double l_of_alpha(double alpha, const ExponentSet& exps);

/// Self-similar frame R(tau) = (T - tau)^{-beta} of a solution extinguishing
/// at time T.
struct SelfSimilarFrame {
  double T = 1.0;
  ExponentSet exps;

  double R(double tau) const;
  double R0() const { return R(0.0); }
};

struct SelfSimilarPoint {
  double x = 0.0;
  double t = 0.0;
  double v = 0.0;
};

struct OriginalPoint {
  double y = 0.0;
  double tau = 0.0;
  double u = 0.0;
};

/// (y, tau, u) -> (x, t, v) with t = log(R(tau)/R(0))/mu,
/// x = sqrt(beta/mu) y / R(tau), v = R(tau)^n u.
SelfSimilarPoint to_selfsimilar(double y, double tau, double u, const SelfSimilarFrame& frame);
OriginalPoint from_selfsimilar(double x, double t, double v, const SelfSimilarFrame& frame);

/// Generalized Barenblatt solution U_{D,T}(y, tau) in original variables.
double barenblatt_original(double D, double y, double tau, const SelfSimilarFrame& frame);

}  // namespace fdlab
