#include "fdlab/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "fdlab/errors.hpp"
#include "fdlab/report_io.hpp"

namespace fdlab {
namespace {

constexpr std::array<std::string_view, 33> kKeys = {
    "n",       "m",        "D",           "delta",      "c",          "l",        "l_values",
    "alpha",   "d",        "r_max",       "grid_n",     "stretch",    "t_end",    "boundary_mode",
    "output_path", "lemma", "case",       "amplitude",  "epsilon",    "eta",      "E",
    "B",       "t0",       "tol",         "m_low",      "points",     "robin_k",  "cadence",
    "sensitivities", "measure", "l_lo",   "l_hi",       "c2"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known(std::string_view key) {
  return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

std::string canonical_value(std::string_view key, const std::string& value) {
  if (key == "m") {
    if (auto q = Rational::parse(value)) return q->str();
  }
  if (value.find(',') != std::string::npos) {
    std::string out;
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      if (!out.empty()) out += ',';
      if (auto x = parse_number(item)) {
        out += shortest_number(*x);
      } else {
        out += item;
      }
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return out;
  }
  if (auto x = parse_number(value)) return shortest_number(*x);
  return value;
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double x = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return x;
}

std::span<const std::string_view> RunConfig::known_keys() { return kKeys; }

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw PreconditionError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (cfg.has(key)) throw PreconditionError("config line " + std::to_string(line_no) + ": duplicate key " + std::string(key));
    cfg.set(key, line.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw PreconditionError("expected key=value, got '" + std::string(assignment) + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void RunConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key.empty()) throw PreconditionError("empty config key");
  if (!known(key)) throw PreconditionError("unknown config key '" + std::string(key) + "'");
  if (value.empty()) throw PreconditionError("empty value for key '" + std::string(key) + "'");
  values_.insert_or_assign(std::string(key), std::string(value));
}

bool RunConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

const std::string& RunConfig::text(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw PreconditionError("missing required key '" + std::string(key) + "'");
  return it->second;
}

std::string RunConfig::text_or(std::string_view key, std::string_view fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? std::string(fallback) : it->second;
}

double RunConfig::number(std::string_view key) const {
  const std::string& v = text(key);
  if (key == "m") {
    if (auto q = Rational::parse(v)) return q->to_double();
  }
  const auto x = parse_number(v);
  if (!x) throw PreconditionError("key '" + std::string(key) + "' is not a number: '" + v + "'");
  return *x;
}

std::optional<double> RunConfig::number_opt(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

double RunConfig::number_or(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t RunConfig::integer(std::string_view key) const {
  const std::string& v = text(key);
  std::int64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw PreconditionError("key '" + std::string(key) + "' is not an integer: '" + v + "'");
  }
  return x;
}

std::int64_t RunConfig::integer_or(std::string_view key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::vector<double> RunConfig::numbers(std::string_view key) const {
  std::vector<double> out;
  std::string_view rest = text(key);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto x = parse_number(rest.substr(0, comma));
    if (!x) throw PreconditionError("key '" + std::string(key) + "' must be a comma-separated list of numbers");
    out.push_back(*x);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  return out;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (k == "output_path") continue;  // where results go does not change them
    out += k;
    out += '=';
    out += canonical_value(k, v);
    out += '\n';
  }
  return out;
}

std::string RunConfig::run_id() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string id(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) id[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return id;
}

ExponentSet exponents_from(const RunConfig& config) {
  const std::int64_t n = config.integer("n");
  if (n < std::numeric_limits<int>::min() || n > 10000) throw PreconditionError("n out of range: " + std::to_string(n));
  if (auto q = Rational::parse(config.text("m"))) return derive_exponents(static_cast<int>(n), *q);
  return derive_exponents(static_cast<int>(n), config.number("m"));
}

std::string RunManifest::header() const {
  std::ostringstream os;
  os << "# fdlab " << version << '\n';
  os << "# command=" << command << '\n';
  os << "# run_id=" << run_id << '\n';
  std::string_view rest = config_echo;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    os << "# config " << rest.substr(0, nl) << '\n';
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
  }
  if (exps) {
    os << "# exponents mu=" << format_number(exps->mu) << " beta=" << format_number(exps->beta)
       << " l_star=" << format_number(exps->l_star) << " alpha_star=" << format_number(exps->alpha_star) << '\n';
  }
  return os.str();
}

RunManifest make_manifest(std::string_view command, const RunConfig& config) {
  RunManifest m;
  m.version = FDLAB_VERSION;
  m.command = command;
  m.config_echo = config.canonical();
  m.run_id = config.run_id();
  if (config.has("n") && config.has("m")) m.exps = exponents_from(config);
  return m;
}

}  // namespace fdlab
