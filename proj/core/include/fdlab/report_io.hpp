#pragma once

#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fdlab/barrier.hpp"
#include "fdlab/config.hpp"
#include "fdlab/rate_lab.hpp"
#include "fdlab/spectral.hpp"

namespace fdlab {

/// 12 significant digits, '.' separator, no locale. Integers print without a
/// fraction ("5", not "5.00000000000").
std::string format_number(double x);
/// Shortest round-trip form; used for canonical config values.
std::string shortest_number(double x);

/// One structured record: space-separated key=value pairs, newline-terminated.
/// Values containing spaces are double-quoted.
class Record {
 public:
  explicit Record(std::string_view kind);
  Record& add(std::string_view key, double value);
  Record& add(std::string_view key, std::string_view value);
  Record& add(std::string_view key, const char* value) { return add(key, std::string_view(value)); }
  Record& add(std::string_view key, bool value);
  Record& add(std::string_view key, std::size_t value);
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

std::string exponents_record(const ExponentSet& exps);
std::string certificate_record(const CertificateReport& report);
std::string rate_record(const RateReport& report);

/// "r,phi,dphi" rows followed by a "# summary" comment line.
void write_phi_csv(std::ostream& os, const RunManifest& manifest, const SpectralSolution& sol);
/// "l,target_rate,fitted_rate,rel_err,rmax_sensitivity,..." one row per report.
void write_rate_table(std::ostream& os, const RunManifest& manifest, std::span<const RateReport> reports);
/// "m,l_star,mu_plus_2" for m on a uniform grid in [m_low, m_star).
void write_figure1(std::ostream& os, const RunManifest& manifest, int n, double m_low, std::size_t points);
/// "l,rate" rows and an "alpha_star" footer.
void write_figure2(std::ostream& os, const RunManifest& manifest, const ExponentSet& exps,
                   std::span<const Figure2Row> rows);
/// Snapshot table "t,r,v,v_minus_V_D" for the given states.
void write_snapshots(std::ostream& os, const RunManifest& manifest, const RadialGrid& grid,
                     const ExponentSet& exps, std::span<const State> states);
/// "t,sup,sup_above,sup_below,argmax_r,tail_bound" time series.
void write_distance_series(std::ostream& os, const RunManifest& manifest, std::span<const Sample> samples);

}  // namespace fdlab
