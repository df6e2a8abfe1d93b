#include "fdlab/exponents.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fdlab/errors.hpp"

namespace fdlab {
namespace {

__extension__ typedef __int128 i128;

std::int64_t checked(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw PreconditionError("rational exponent arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

// Small exact arithmetic on normalized rationals; enough for the exponent
// formulas, which only add, multiply and divide a handful of terms.
struct Q {
  i128 p;
  i128 q;
};

Q norm(i128 p, i128 q) {
  if (q == 0) throw PreconditionError("rational exponent arithmetic: division by zero");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  i128 a = p < 0 ? -p : p;
  i128 b = q;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = 1;
  return {p / a, q / a};
}

Q operator+(Q a, Q b) { return norm(a.p * b.q + b.p * a.q, a.q * b.q); }
Q operator-(Q a, Q b) { return norm(a.p * b.q - b.p * a.q, a.q * b.q); }
Q operator*(Q a, Q b) { return norm(a.p * b.p, a.q * b.q); }
Q operator/(Q a, Q b) { return norm(a.p * b.q, a.q * b.p); }
Q lit(std::int64_t v) { return {v, 1}; }
double to_d(Q v) { return static_cast<double>(checked(v.p)) / static_cast<double>(checked(v.q)); }
bool less(Q a, Q b) { return a.p * b.q < b.p * a.q; }

void check_dimension(int n) {
  if (n <= 2) {
    throw PreconditionError("n must be > 2 (got n=" + std::to_string(n) + ")");
  }
}

std::string fmt12(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

Rational Rational::make(std::int64_t num, std::int64_t den) {
  Q r = norm(num, den);
  return {checked(r.p), checked(r.q)};
}

std::optional<Rational> Rational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t p = 0;
    std::int64_t q = 0;
    auto lhs = text.substr(0, slash);
    auto rhs = text.substr(slash + 1);
    auto [e1, ec1] = std::from_chars(lhs.data(), lhs.data() + lhs.size(), p);
    auto [e2, ec2] = std::from_chars(rhs.data(), rhs.data() + rhs.size(), q);
    if (ec1 != std::errc{} || ec2 != std::errc{} || e1 != lhs.data() + lhs.size() ||
        e2 != rhs.data() + rhs.size() || q == 0) {
      return std::nullopt;
    }
    return make(p, q);
  }

  // Terminating decimal with optional exponent.
  bool negative = false;
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  i128 mant = 0;
  int scale = 0;
  int digits = 0;
  bool seen_dot = false;
  for (; i < text.size(); ++i) {
    char ch = text[i];
    if (ch == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(ch))) break;
    if (++digits > 18) return std::nullopt;
    mant = mant * 10 + (ch - '0');
    if (seen_dot) --scale;
  }
  if (digits == 0) return std::nullopt;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return std::nullopt;
    ++i;
    int e = 0;
    auto rest = text.substr(i);
    if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
    auto [end, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
    if (ec != std::errc{} || end != rest.data() + rest.size()) return std::nullopt;
    scale += e;
  }
  if (scale > 18 || scale < -18) return std::nullopt;
  i128 p = negative ? -mant : mant;
  i128 q = 1;
  for (int k = 0; k < scale; ++k) p *= 10;
  for (int k = 0; k < -scale; ++k) q *= 10;
  Q r = norm(p, q);
  return Rational{checked(r.p), checked(r.q)};
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

double ExponentSet::k_star() const { return std::pow(2.0 * (n - mu), mu / 2.0); }

ExponentSet derive_exponents(int n, double m) {
  check_dimension(n);
  if (!std::isfinite(m)) throw PreconditionError("m must be finite");
  const double nn = n;
  ExponentSet e;
  e.n = n;
  e.m = m;
  e.m_c = (nn - 2.0) / nn;
  e.m_star = (nn - 4.0) / (nn - 2.0);
  if (!(m < e.m_star)) {
    throw PreconditionError("m must be < m_star=" + fmt12(e.m_star) + " (got m=" + fmt12(m) + ")");
  }
  e.mu = 2.0 / (1.0 - m);
  e.beta = 1.0 / (nn * (1.0 - m) - 2.0);
  e.l_star = (nn + e.mu + 2.0) / 2.0;
  const double gap = nn - e.mu - 2.0;
  e.alpha_star = gap * gap / 4.0;
  return e;
}

ExponentSet derive_exponents(int n, const Rational& m) {
  check_dimension(n);
  const Q mq = norm(m.num, m.den);
  const Q nq = lit(n);
  const Q m_c = (nq - lit(2)) / nq;
  const Q m_star = (nq - lit(4)) / (nq - lit(2));
  if (!less(mq, m_star)) {
    throw PreconditionError("m must be < m_star=" + fmt12(to_d(m_star)) + " (got m=" + m.str() + ")");
  }
  const Q one_minus_m = lit(1) - mq;
  const Q mu = lit(2) / one_minus_m;
  const Q beta = lit(1) / (nq * one_minus_m - lit(2));
  const Q l_star = (nq + mu + lit(2)) / lit(2);
  const Q gap = nq - mu - lit(2);
  const Q alpha_star = gap * gap / lit(4);

  ExponentSet e;
  e.n = n;
  e.m = to_d(mq);
  e.mu = to_d(mu);
  e.beta = to_d(beta);
  e.m_c = to_d(m_c);
  e.m_star = to_d(m_star);
  e.l_star = to_d(l_star);
  e.alpha_star = to_d(alpha_star);
  e.m_exact = m;
  return e;
}

double profile_value(const ProfileSpec& p, double r) {
  if (p.D < 0.0) throw PreconditionError("profile parameter D must be >= 0");
  if (r < 0.0) throw PreconditionError("radius must be >= 0");
  if (p.D == 0.0 && r == 0.0) {
    throw PreconditionError("singular profile (D=0) is undefined at r=0");
  }
  return std::pow(p.D + r * r, -p.exps.mu / 2.0);
}

double rate_of_l(double l, const ExponentSet& exps) {
  if (!(l > exps.l_min()) || !(l <= exps.l_star)) {
    throw PreconditionError("l must lie in (mu+2, l_star]=(" + fmt12(exps.l_min()) + ", " +
                            fmt12(exps.l_star) + "] (got l=" + fmt12(l) + ")");
  }
  return (l - exps.mu - 2.0) * (exps.n - l);
}

double l_of_alpha(double alpha, const ExponentSet& exps) {
  if (!(alpha > 0.0) || !(alpha <= exps.alpha_star)) {
    throw PreconditionError("alpha must lie in (0, alpha_star]=(0, " + fmt12(exps.alpha_star) +
                            "] (got alpha=" + fmt12(alpha) + ")");
  }
  const double gap = exps.n - exps.mu - 2.0;
  const double disc = std::max(0.0, gap * gap - 4.0 * alpha);
  return (exps.n + exps.mu + 2.0 - std::sqrt(disc)) / 2.0;
}

double SelfSimilarFrame::R(double tau) const {
  if (!(T > 0.0)) throw PreconditionError("extinction time T must be > 0");
  if (!(tau < T)) throw PreconditionError("tau must be < T (got tau=" + fmt12(tau) + ", T=" + fmt12(T) + ")");
  return std::pow(T - tau, -exps.beta);
}

SelfSimilarPoint to_selfsimilar(double y, double tau, double u, const SelfSimilarFrame& frame) {
  if (tau < 0.0) throw PreconditionError("tau must be >= 0");
  const double R = frame.R(tau);
  const double R0 = frame.R0();
  const ExponentSet& e = frame.exps;
  SelfSimilarPoint p;
  p.t = std::log(R / R0) / e.mu;
  p.x = std::sqrt(e.beta / e.mu) * y / R;
  p.v = std::pow(R, e.n) * u;
  return p;
}

OriginalPoint from_selfsimilar(double x, double t, double v, const SelfSimilarFrame& frame) {
  if (t < 0.0) throw PreconditionError("t must be >= 0");
  const ExponentSet& e = frame.exps;
  const double R = frame.R0() * std::exp(e.mu * t);
  OriginalPoint p;
  p.tau = frame.T - std::pow(R, -1.0 / e.beta);
  p.y = x * R / std::sqrt(e.beta / e.mu);
  p.u = v * std::pow(R, -e.n);
  return p;
}

double barenblatt_original(double D, double y, double tau, const SelfSimilarFrame& frame) {
  const ExponentSet& e = frame.exps;
  const double R = frame.R(tau);
  const double s = y / R;
  return std::pow(R, -e.n) * std::pow(D + e.beta * (1.0 - e.m) / 2.0 * s * s, -1.0 / (1.0 - e.m));
}

}  // namespace fdlab
