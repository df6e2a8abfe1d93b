#include "fdlab/report_io.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "fdlab/errors.hpp"

namespace fdlab {
namespace {

std::string to_chars_string(double x, std::chars_format fmt, int precision) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto res = precision < 0 ? std::to_chars(buf.data(), buf.data() + buf.size(), x)
                                 : std::to_chars(buf.data(), buf.data() + buf.size(), x, fmt, precision);
  return std::string(buf.data(), res.ptr);
}

std::string optional_number(const std::optional<double>& x) { return x ? format_number(*x) : std::string("nan"); }

}  // namespace

std::string format_number(double x) { return to_chars_string(x, std::chars_format::general, 12); }

std::string shortest_number(double x) { return to_chars_string(x, std::chars_format::general, -1); }

Record::Record(std::string_view kind) { fields_.emplace_back("record", std::string(kind)); }

Record& Record::add(std::string_view key, double value) {
  fields_.emplace_back(std::string(key), format_number(value));
  return *this;
}

Record& Record::add(std::string_view key, std::string_view value) {
  std::string v(value);
  if (v.empty() || v.find_first_of(" \t\"=") != std::string::npos) {
    std::string q = "\"";
    for (char ch : v) {
      if (ch == '"' || ch == '\\') q += '\\';
      q += ch;
    }
    v = q + "\"";
  }
  fields_.emplace_back(std::string(key), std::move(v));
  return *this;
}

Record& Record::add(std::string_view key, bool value) {
  fields_.emplace_back(std::string(key), value ? "true" : "false");
  return *this;
}

Record& Record::add(std::string_view key, std::size_t value) {
  fields_.emplace_back(std::string(key), std::to_string(value));
  return *this;
}

std::string Record::str() const {
  std::string out;
  for (const auto& [k, v] : fields_) {
    if (!out.empty()) out += ' ';
    out += k;
    out += '=';
    out += v;
  }
  out += '\n';
  return out;
}

std::string exponents_record(const ExponentSet& e) {
  Record r("exponents");
  r.add("n", static_cast<std::size_t>(e.n)).add("m", e.m_exact ? e.m_exact->str() : format_number(e.m));
  r.add("mu", e.mu).add("beta", e.beta).add("m_c", e.m_c).add("m_star", e.m_star);
  r.add("l_star", e.l_star).add("alpha_star", e.alpha_star).add("mu_plus_2", e.l_min());
  return r.str();
}

std::string certificate_record(const CertificateReport& c) {
  std::string out;
  Record r("certificate");
  r.add("lemma", to_string(c.lemma)).add("role", to_string(c.role));
  r.add("status", c.passed() && c.predicates_hold() ? "pass" : "fail");
  r.add("sign_check", c.passed()).add("predicates", c.predicates_hold());
  r.add("grid", c.grid).add("space_nodes", c.space_nodes).add("time_samples", c.time_samples);
  r.add("nodes_checked", c.nodes_checked).add("interface_nodes", c.interface_nodes);
  r.add("margin", c.margin).add("violations", c.violations.size());
  if (c.worst) r.add("worst_r", c.worst->r).add("worst_t", c.worst->t).add("worst_residual", c.worst->residual);
  out += r.str();
  for (const auto& p : c.predicates) {
    Record q("predicate");
    q.add("name", p.name).add("lhs", p.lhs).add("rhs", p.rhs).add("strict", p.strict).add("holds", p.holds());
    out += q.str();
  }
  Record e("parameters");
  for (const auto& [k, v] : c.echo) e.add(k, v);
  out += e.str();
  return out;
}

std::string rate_record(const RateReport& rep) {
  Record r("rate");
  r.add("plan", rep.plan_id).add("case", rep.initial_case).add("measure", rep.measure);
  r.add("l", rep.l).add("e0", rep.e0).add("fitted_rate", rep.fitted_rate);
  r.add("t1", rep.t1).add("t2", rep.t2).add("residual", rep.residual).add("decades", rep.decades);
  r.add("target_rate", optional_number(rep.target_rate)).add("rel_err", optional_number(rep.rel_err));
  r.add("rmax_sensitivity", optional_number(rep.rmax_sensitivity));
  r.add("n_sensitivity", optional_number(rep.n_sensitivity));
  r.add("shift_sensitivity", optional_number(rep.shift_sensitivity));
  r.add("tail_ratio", rep.tail_ratio);
  if (rep.band_rate) r.add("band_rate", *rep.band_rate);
  if (rep.ceiling) r.add("ceiling", *rep.ceiling);
  r.add("certificate", rep.certificate.empty() ? std::string("none") : rep.certificate);
  r.add("certificate_passed", rep.certificate_passed);
  r.add("inconclusive", rep.inconclusive).add("robust", rep.robust).add("steps", rep.steps);
  if (!rep.note.empty()) r.add("note", rep.note);
  return r.str();
}

void write_phi_csv(std::ostream& os, const RunManifest& manifest, const SpectralSolution& sol) {
  os << manifest.header();
  os << "r,phi,dphi\n";
  for (std::size_t i = 0; i < sol.r_nodes.size(); ++i) {
    os << format_number(sol.r_nodes[i]) << ',' << format_number(sol.phi[i]) << ',' << format_number(sol.dphi[i])
       << '\n';
  }
  os << "# summary first_zero=" << (sol.first_zero ? format_number(*sol.first_zero) : std::string("none"))
     << " tail_exponent=" << (sol.tail ? format_number(sol.tail->exponent) : std::string("nan"))
     << " r_end=" << format_number(sol.r_end) << '\n';
}

void write_rate_table(std::ostream& os, const RunManifest& manifest, std::span<const RateReport> reports) {
  os << manifest.header();
  os << "l,target_rate,fitted_rate,rel_err,rmax_sensitivity,n_sensitivity,shift_sensitivity,t1,t2,decades,"
        "certificate,status\n";
  for (const auto& r : reports) {
    os << format_number(r.l) << ',' << optional_number(r.target_rate) << ',' << format_number(r.fitted_rate) << ','
       << optional_number(r.rel_err) << ',' << optional_number(r.rmax_sensitivity) << ','
       << optional_number(r.n_sensitivity) << ',' << optional_number(r.shift_sensitivity) << ','
       << format_number(r.t1) << ',' << format_number(r.t2) << ',' << format_number(r.decades) << ','
       << (r.certificate.empty() ? "none" : r.certificate) << (r.certificate_passed ? ":pass" : ":fail") << ','
       << (r.inconclusive ? "inconclusive" : r.robust ? "accepted" : "window_sensitive") << '\n';
  }
}

void write_figure1(std::ostream& os, const RunManifest& manifest, int n, double m_low, std::size_t points) {
  if (points < 2) throw PreconditionError("figure1 needs at least 2 points");
  const double m_star = (n - 4.0) / (n - 2.0);
  if (!(m_low < m_star)) throw PreconditionError("m_low must be < m_star=" + format_number(m_star));
  os << manifest.header();
  os << "m,l_star,mu_plus_2\n";
  // Uniform in [m_low, m_star), the open end approached but not reached.
  for (std::size_t i = 0; i < points; ++i) {
    const double m = m_low + (m_star - m_low) * static_cast<double>(i) / static_cast<double>(points);
    const ExponentSet e = derive_exponents(n, m);
    os << format_number(m) << ',' << format_number(e.l_star) << ',' << format_number(e.l_min()) << '\n';
  }
}

void write_figure2(std::ostream& os, const RunManifest& manifest, const ExponentSet& exps,
                   std::span<const Figure2Row> rows) {
  os << manifest.header();
  bool fitted = false;
  for (const auto& r : rows) fitted = fitted || r.fitted.has_value();
  os << (fitted ? "l,rate,fitted_rate\n" : "l,rate\n");
  for (const auto& r : rows) {
    os << format_number(r.l) << ',' << format_number(r.rate);
    if (fitted) os << ',' << optional_number(r.fitted);
    os << '\n';
  }
  os << "# alpha_star=" << format_number(exps.alpha_star) << '\n';
}

void write_snapshots(std::ostream& os, const RunManifest& manifest, const RadialGrid& grid, const ExponentSet& exps,
                     std::span<const State> states) {
  os << manifest.header();
  os << "t,r,v,v_minus_V_D\n";
  for (const auto& s : states) {
    const auto v = s.v(grid, exps);
    const auto dv = s.deviation(grid, exps);
    for (std::size_t i = 0; i < grid.r.size(); ++i) {
      os << format_number(s.t) << ',' << format_number(grid.r[i]) << ',' << format_number(v[i]) << ','
         << format_number(dv[i]) << '\n';
    }
  }
}

void write_distance_series(std::ostream& os, const RunManifest& manifest, std::span<const Sample> samples) {
  os << manifest.header();
  os << "t,sup,sup_above,sup_below,argmax_r,tail_bound\n";
  for (const auto& s : samples) {
    const auto& d = s.distance;
    os << format_number(s.t) << ',' << format_number(d.sup) << ',' << format_number(d.sup_above) << ','
       << format_number(d.sup_below) << ',' << format_number(d.argmax_r) << ',' << format_number(d.tail_bound)
       << '\n';
  }
}

}  // namespace fdlab
