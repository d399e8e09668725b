#pragma once

// Command-line driver: config parsing, the verification checks behind each
// subcommand, and CSV reporting.

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "susy/sde.hpp"

namespace susy {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key = value` lines, `#` comments. Keys: m, h, T_support, n_paths, seed,
/// V.name, V.lambda, F.name (comma list), quad_tol, eps_list (comma list).
/// Unknown keys, malformed numbers and invalid values throw ConfigError.
SimConfig parse_config(std::string_view text, SimConfig base = {});
SimConfig load_config(const std::string& path);

struct ReportRow {
  std::string check_id;
  std::string quantity;
  double value = 0.0;
  std::optional<double> std_err;
  double reference = 0.0;
  double tolerance = 0.0;

  bool pass() const { return std::abs(value - reference) <= tolerance; }
};

inline constexpr std::string_view kCsvHeader =
    "check_id,quantity,value,std_err,reference,tolerance,pass";

std::string format_double(double x);
std::string to_csv(const std::vector<ReportRow>& rows);

/// Subcommands in the order `all` runs them.
const std::vector<std::string>& subcommands();

/// Runs one subcommand (not `all`). The context caches the shared Monte
/// Carlo run so verify-gibbs and verify-girsanov simulate once.
class CheckRunner {
 public:
  explicit CheckRunner(SimConfig config) : config_(std::move(config)) {}

  std::vector<ReportRow> run(const std::string& subcommand);
  /// Human-readable notes gathered while running (e.g. the normalisation display).
  const std::vector<std::string>& notes() const { return notes_; }
  const SimConfig& config() const { return config_; }

 private:
  std::vector<ReportRow> algebra_selftest();
  std::vector<ReportRow> verify_reduction();
  std::vector<ReportRow> verify_wick();
  std::vector<ReportRow> verify_localization();
  std::vector<ReportRow> verify_girsanov();
  std::vector<ReportRow> verify_gibbs();
  std::vector<ReportRow> wong_zakai();
  const MainTheoremReport& main_report();

  SimConfig config_;
  std::optional<MainTheoremReport> main_;
  std::vector<std::string> notes_;
};

/// Estimator-level localization rows alone (also part of verify-localization).
std::vector<ReportRow> localization_estimator_rows(const SimConfig& c);

/// argv excludes the program name. Exit codes: 0 all rows pass, 1 a row
/// fails, 2 usage or configuration error (no CSV written).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace susy
