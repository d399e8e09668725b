#include "susy/cli.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "susy/grassmann.hpp"
#include "susy/superfunction.hpp"
#include "susy/superwick.hpp"

namespace susy {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    out.push_back(trim(s.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return x;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

ReportRow row(std::string id, std::string quantity, double value, double reference,
              double tolerance, std::optional<double> std_err = std::nullopt) {
  return {std::move(id), std::move(quantity), value, std_err, reference, tolerance};
}

// --- algebra ---------------------------------------------------------------

GrassmannElement random_element(std::mt19937_64& rng, unsigned gens) {
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> nterms(0, 5);
  std::uniform_int_distribution<GrassmannElement::Mask> mask(0, (GrassmannElement::Mask{1} << gens) - 1);
  GrassmannElement e;
  const int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    const auto m = mask(rng);
    e += GrassmannElement::from_mask(m, coef(rng));
  }
  return e;
}

}  // namespace

SimConfig parse_config(std::string_view text, SimConfig c) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (value.empty()) throw ConfigError("config key '" + key + "' has no value");
    if (key == "m") {
      c.m = parse_double(key, value);
    } else if (key == "h") {
      c.h = parse_double(key, value);
    } else if (key == "T_support") {
      c.T_support = parse_double(key, value);
    } else if (key == "n_paths") {
      c.n_paths = parse_u64(key, value);
    } else if (key == "seed") {
      c.master_seed = parse_u64(key, value);
    } else if (key == "V.name") {
      c.V_name = value;
    } else if (key == "V.lambda") {
      c.V_lambda = parse_double(key, value);
    } else if (key == "F.name") {
      c.F_names = split_list(value);
    } else if (key == "quad_tol") {
      c.quad_tol = parse_double(key, value);
    } else if (key == "eps_list") {
      c.eps_list.clear();
      for (const auto& item : split_list(value)) c.eps_list.push_back(parse_double(key, item));
    } else {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string s(kCsvHeader);
  s += '\n';
  for (const auto& r : rows) {
    s += r.check_id + ',' + r.quantity + ',' + format_double(r.value) + ',';
    if (r.std_err) s += format_double(*r.std_err);
    s += ',' + format_double(r.reference) + ',' + format_double(r.tolerance) + ',';
    s += r.pass() ? "true" : "false";
    s += '\n';
  }
  return s;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{
      "algebra-selftest",   "verify-reduction", "verify-wick", "verify-localization",
      "verify-girsanov", "verify-gibbs",     "wong-zakai"};
  return names;
}

std::vector<ReportRow> CheckRunner::run(const std::string& subcommand) {
  if (subcommand == "algebra-selftest") return algebra_selftest();
  if (subcommand == "verify-reduction") return verify_reduction();
  if (subcommand == "verify-wick") return verify_wick();
  if (subcommand == "verify-localization") return verify_localization();
  if (subcommand == "verify-girsanov") return verify_girsanov();
  if (subcommand == "verify-gibbs") return verify_gibbs();
  if (subcommand == "wong-zakai") return wong_zakai();
  throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
}

std::vector<ReportRow> CheckRunner::algebra_selftest() {
  std::mt19937_64 rng(splitmix64(config_.master_seed ^ 0xa1a1a1a1ULL));
  constexpr unsigned kGens = 6;
  constexpr int kElements = 10000;
  std::uniform_int_distribution<unsigned> gen(0, kGens - 1);

  int anti = 0, assoc = 0, nil = 0, linear = 0, canonical = 0;
  for (int i = 0; i < kElements; ++i) {
    unsigned a = gen(rng), b = gen(rng);
    if (a == b) b = (b + 1) % kGens;
    const auto ta = GrassmannElement::generator(GeneratorId{a});
    const auto tb = GrassmannElement::generator(GeneratorId{b});
    if (!(mul(ta, tb) == -mul(tb, ta))) ++anti;

    const auto x = random_element(rng, kGens);
    const auto y = random_element(rng, kGens);
    const auto z = random_element(rng, kGens);
    if (!(mul(mul(x, y), z) == mul(x, mul(y, z)))) ++assoc;

    std::uniform_int_distribution<int> c(-3, 3);
    // A sum of odd monomials squares to zero.
    GrassmannElement odd;
    for (const auto& t : x.terms()) {
      if (std::popcount(t.mask) % 2 == 1) odd += GrassmannElement::from_mask(t.mask, t.coef);
    }
    odd += GrassmannElement::from_mask(GrassmannElement::Mask{1} << gen(rng), c(rng) | 1);
    if (!mul(odd, odd).is_zero()) ++nil;

    const GeneratorId g{gen(rng)};
    const double k = c(rng);
    if (!(berezin(add_scale(x, y, k), {g}) == add_scale(berezin(x, {g}), berezin(y, {g}), k))) {
      ++linear;
    }
    for (const auto& t : mul(x, y).terms()) {
      if (t.coef == 0.0) ++canonical;
    }
  }
  std::vector<ReportRow> rows;
  rows.push_back(row("algebra.anticommutativity", "failures", anti, 0, 0));
  rows.push_back(row("algebra.associativity", "failures", assoc, 0, 0));
  rows.push_back(row("algebra.nilpotency", "failures", nil, 0, 0));
  rows.push_back(row("algebra.berezin_linearity", "failures", linear, 0, 0));
  rows.push_back(row("algebra.canonical_form", "stored_zero_terms", canonical, 0, 0));

  const GeneratorId t1{0}, t2{1};
  rows.push_back(row("algebra.berezin_single", "int theta dtheta",
                     berezin(GrassmannElement::generator(t1), {t1}).scalar_part(), 1, 0));
  rows.push_back(row("algebra.berezin_unit", "int 1 dtheta",
                     berezin(GrassmannElement(1.0), {t1}).max_abs(), 0, 0));
  rows.push_back(row("algebra.berezin_pair", "int theta thetabar dtheta dthetabar",
                     berezin(GrassmannElement::monomial({t1, t2}), {t1, t2}).scalar_part(), -1, 0));
  return rows;
}

std::vector<ReportRow> CheckRunner::verify_reduction() {
  constexpr double kTol = 1e-8;
  struct Case {
    std::string name;
    ScalarFn T, F;
    double K;
  };
  const auto expo = fns::exp_quadratic(0.0, 1.0);
  auto gauss_bump = [](double K) { return fns::exp_quadratic(-1.0, 2.0 * K + 1.0, -K * K); };
  const std::vector<Case> corpus{
      {"exp_exp_K0", expo, expo, 0.0},
      {"exp_exp_K1", expo, expo, 1.0},
      {"exp_exp_Km0.5", expo, expo, -0.5},
      {"bump_bump_K1", gauss_bump(1.0), gauss_bump(1.0), 1.0},
      {"bump_bump_K0", gauss_bump(0.0), gauss_bump(0.0), 0.0},
      {"exp_bump_K1", expo, gauss_bump(1.0), 1.0},
      {"bump_exp_K0.3", gauss_bump(0.3), expo, 0.3},
  };
  std::vector<ReportRow> rows;
  for (const auto& c : corpus) {
    const auto r = reduce_integral(lift_supersymmetric(c.T), lift_supersymmetric(c.F), c.K, 1e-11);
    rows.push_back(row("reduction." + c.name, "lhs", r.lhs, r.rhs, kTol));
  }
  return rows;
}

std::vector<ReportRow> CheckRunner::verify_wick() {
  const CovarianceSpec spec(config_.m);
  std::vector<ReportRow> rows;

  std::mt19937_64 rng(splitmix64(config_.master_seed ^ 0x3171c4ULL));
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int n = 1; n <= 6; ++n) {
    const double ref = std::ldexp(1.0, -n);
    double worst = ref;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> times(n);
      for (auto& t : times) t = U(rng);
      const double d = fermionic_det(spec, times);
      if (std::abs(d - ref) > std::abs(worst - ref)) worst = d;
    }
    rows.push_back(row("wick.fermionic_det.n" + std::to_string(n), "worst_det_of_100", worst, ref, 1e-12));
  }

  // <phi(t) Phi(s)> against super_cov with theta = thetabar = 0 and the
  // supersymmetry of s -> <phi(t) Phi(s)> for s <= t.
  const double t = 0.3;
  const SuperFunction corr = phi_superfield_correlation(spec, t);
  for (double d : {0.0, 0.1, 1.0, 5.0}) {
    const double s = t - d;
    const std::array<double, 1> grid{s};
    double defect = supersymmetry_defect(corr, grid);
    if (d > 0.0) {
      const GrassmannElement sc = restrict_zero(super_cov(spec, t, s), 0b11);
      const GrassmannElement c = corr(s);
      defect = std::max({defect, std::abs(sc.scalar_part() - c.scalar_part()),
                         std::abs(sc.coefficient(0b1100) - c.coefficient(0b11)),
                         std::abs(sc.coefficient(0b0100)), std::abs(sc.coefficient(0b1000))});
    }
    rows.push_back(row("wick.super_cov_supersymmetry.d" + label(d), "defect", defect, 0.0, 1e-12));
  }

  const std::array<SuperInsertion, 1> square{SuperInsertion{0.4, 0, 2, {}}};
  const GrassmannElement phi2 = wick_super_expectation(spec, square, {});
  rows.push_back(row("wick.phi_square.scalar", "<Phi^2>_0", phi2.scalar_part(), spec.phi_var(), 0.0));
  rows.push_back(row("wick.phi_square.top", "<Phi^2>_theta_thetabar", phi2.coefficient(0b11), 0.0, 0.0));

  const std::array<SuperInsertion, 1> cube{SuperInsertion{0.2, 0, 2, {}}};
  const std::array<PrefactorFactor, 1> pre{PrefactorFactor{0.0, 2}};
  const double isserlis = gaussian_moment(spec, std::array<double, 2>{0.0, 0.2}, std::array<int, 2>{2, 2});
  rows.push_back(row("wick.reduces_to_isserlis", "<phi(0)^2 Phi(0.2)^2>_0",
                     wick_super_expectation(spec, cube, pre).scalar_part(), isserlis, 1e-15));
  return rows;
}

namespace {

std::vector<ReportRow> localization_matrix(const SimConfig& c) {
  const CovarianceSpec spec(c.m);
  const double tol = std::max(1e-6, c.quad_tol);
  const ScalarFn g = fns::bump(1.5);
  const std::vector<std::pair<std::string, std::vector<double>>> polys{
      {"x", {0.0, 1.0}}, {"x2", {0.0, 0.0, 1.0}}, {"x2+x", {0.0, 1.0, 1.0}}};
  const std::vector<std::vector<PrefactorFactor>> prefactors{
      {}, {{0.0, 2}}, {{0.5, 1}, {-0.25, 1}}};
  std::vector<ReportRow> rows;
  for (int ell = 1; ell <= 2; ++ell) {
    for (const auto& [pname, P] : polys) {
      for (std::size_t k = 0; k < prefactors.size(); ++k) {
        LocalizationProblem prob{prefactors[k], g, P, ell, {}};
        const auto lhs = localization_lhs(spec, prob, c.quad_tol);
        rows.push_back(row("localization.l" + std::to_string(ell) + ".P" + pname + ".k" +
                               std::to_string(k),
                           "lhs", lhs.value, localization_rhs(spec, prob), tol));
      }
    }
  }
  // Relabelled generator pairs give the same value.
  LocalizationProblem swapped{{{0.0, 2}}, g, {0.0, 1.0, 1.0}, 2, {3, 1}};
  rows.push_back(row("localization.relabel", "lhs", localization_lhs(spec, swapped, c.quad_tol).value,
                     localization_rhs(spec, swapped), tol));
  return rows;
}

}  // namespace

std::vector<ReportRow> localization_estimator_rows(const SimConfig& c) {
  std::vector<ReportRow> rows;
  const SuperFunction G = lift_supersymmetric(c.f());
  const double c0 = -2.0 * c.f()(0.0);
  const double qt = c.quad_tol;

  // K = exp, H = V: reduces to <F e^{-2V}> under the Gaussian.
  std::vector<Observable> obs;
  for (const auto& n : c.F_names) obs.push_back(make_observable(n));
  const auto est = super_expectation_estimates(obs, G, c.V(), LocalizationKernel::exp(), c);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double ref = gaussian_kernel_expectation(obs[i], LocalizationKernel::exp(), c0, c.V(), c, 0.1 * qt);
    rows.push_back(row("estimator.exp." + obs[i].name, "mean", est[i].mean, ref,
                       3.0 * est[i].std_err, est[i].std_err));
  }

  // Polynomial K of degree 2 with H(x) = x^2: against quadrature and against
  // the symbolic localization value sum_j k_j j! L_j.
  const std::vector<double> kpoly{1.0, 1.0, 0.5};
  const std::vector<double> hpoly{0.0, 0.0, 1.0};
  const ScalarFn H = fns::polynomial(hpoly);
  const std::vector<Observable> pobs{make_observable("one"), make_observable("x2")};
  const auto pest = super_expectation_estimates(pobs, G, H, LocalizationKernel::polynomial(kpoly), c);
  const CovarianceSpec spec(c.m);
  for (std::size_t i = 0; i < pobs.size(); ++i) {
    const int m = static_cast<int>(2 * i);
    double symbolic = 0.0;
    double factorial = 1.0;
    for (int j = 0; j < static_cast<int>(kpoly.size()); ++j) {
      if (j > 0) factorial *= j;
      double moment;
      if (j == 0) {
        moment = gaussian_moment(spec, std::array<double, 1>{0.0}, std::array<int, 1>{m});
      } else {
        LocalizationProblem prob{{{0.0, m}}, c.f(), hpoly, j, {}};
        moment = localization_lhs(spec, prob, 0.1 * qt).value;
      }
      symbolic += kpoly[j] * factorial * moment;
    }
    const double quad =
        gaussian_kernel_expectation(pobs[i], LocalizationKernel::polynomial(kpoly), c0, H, c, 0.1 * qt);
    rows.push_back(row("estimator.poly." + pobs[i].name, "mean", pest[i].mean, quad,
                       3.0 * pest[i].std_err, pest[i].std_err));
    rows.push_back(row("estimator.poly_symbolic." + pobs[i].name, "mean", pest[i].mean, symbolic,
                       3.0 * pest[i].std_err, pest[i].std_err));
  }
  return rows;
}

std::vector<ReportRow> CheckRunner::verify_localization() {
  auto rows = localization_matrix(config_);
  auto est = localization_estimator_rows(config_);
  rows.insert(rows.end(), est.begin(), est.end());
  return rows;
}

const MainTheoremReport& CheckRunner::main_report() {
  if (!main_) {
    main_ = verify_main_theorem(config_);
    // Both sides of the normalisation display, for information only.
    const double gauss_norm = std::sqrt(std::numbers::pi) / config_.m;
    notes_.push_back("E[w] (SDE paths) = " + format_double(main_->mean_weight_direct.mean) +
                     " +- " + format_double(main_->mean_weight_direct.std_err) +
                     "; E[exp(S)] (OU paths) = " + format_double(main_->mean_weight_girsanov.mean));
    notes_.push_back("int exp(-m^2x^2-2V) = " + format_double(main_->gibbs_normalizer) +
                     "; ratio to Gaussian normaliser = " +
                     format_double(main_->gibbs_normalizer / gauss_norm));
    notes_.push_back("Z as displayed, E[w] / int exp(-m^2x^2-2V) = " +
                     format_double(main_->mean_weight_direct.mean / main_->gibbs_normalizer));
  }
  return *main_;
}

std::vector<ReportRow> CheckRunner::verify_gibbs() {
  const auto& r = main_report();
  std::vector<ReportRow> rows;
  const double qt = config_.quad_tol;
  for (const auto& x : r.rows) {
    rows.push_back(row("gibbs.E1." + x.observable, "E1", x.e1.mean, x.e3, 3.0 * (x.e1.std_err + qt),
                       x.e1.std_err));
    rows.push_back(row("gibbs.E2." + x.observable, "E2", x.e2.mean, x.e3, 3.0 * (x.e2.std_err + qt),
                       x.e2.std_err));
  }
  return rows;
}

std::vector<ReportRow> CheckRunner::verify_girsanov() {
  const auto& r = main_report();
  std::vector<ReportRow> rows;
  for (const auto& x : r.rows) {
    const double se = std::hypot(x.e1.std_err, x.e2.std_err);
    rows.push_back(row("girsanov." + x.observable, "E1", x.e1.mean, x.e2.mean, 3.0 * se, se));
  }
  return rows;
}

std::vector<ReportRow> CheckRunner::wong_zakai() {
  constexpr std::uint64_t kSeeds = 32;
  const auto runs = wong_zakai_batch(config_, config_.eps_list, drift_integrand(config_), kSeeds);
  std::vector<ReportRow> rows;
  if (config_.eps_list.size() < 2) return rows;
  int decreasing = 0;
  std::vector<double> finals;
  for (const auto& r : runs) {
    if (r.back().discrepancy < r.front().discrepancy) ++decreasing;
    finals.push_back(r.back().discrepancy);
  }
  std::sort(finals.begin(), finals.end());
  const double median = 0.5 * (finals[kSeeds / 2 - 1] + finals[kSeeds / 2]);
  rows.push_back(row("wong_zakai.decreasing_seeds", "count", decreasing, kSeeds, kSeeds - 24));
  rows.push_back(row("wong_zakai.median_final", "discrepancy", median, 0.0, 0.05));
  for (std::size_t e = 0; e < config_.eps_list.size(); ++e) {
    std::vector<double> d;
    for (const auto& r : runs) d.push_back(r[e].discrepancy);
    std::sort(d.begin(), d.end());
    // Informational: median per eps, no threshold of its own.
    rows.push_back(row("wong_zakai.median.eps" + label(config_.eps_list[e]), "discrepancy",
                       0.5 * (d[kSeeds / 2 - 1] + d[kSeeds / 2]), 0.0, HUGE_VAL));
  }
  return rows;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical checks of the supersymmetric representation of a scalar SDE"};
  app.set_version_flag("--version", "susy_verify 1.0");
  std::string subcommand;
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  bool fast = false;
  int threads = 0;
  std::vector<std::string> allowed = subcommands();
  allowed.push_back("all");
  app.add_option("subcommand", subcommand, "check to run")
      ->required()
      ->check(CLI::IsMember(allowed));
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "CSV output path (default: standard output)");
  app.add_option("--seed", seed, "master seed, overrides the config");
  app.add_flag("--fast", fast, "quarter-size Monte Carlo runs");
  app.add_option("--threads", threads, "worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "susy_verify 1.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  SimConfig config;
  try {
    config = config_path.empty() ? parse_config("") : load_config(config_path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (seed) config.master_seed = *seed;
  if (fast) config.n_paths = std::max<std::uint64_t>(2, config.n_paths / 4);
  config.threads = threads;

  const std::vector<std::string> todo =
      subcommand == "all" ? subcommands() : std::vector<std::string>{subcommand};
  CheckRunner runner(config);
  std::vector<ReportRow> rows;
  std::ostream& summary = out_path.empty() ? err : out;
  for (const auto& name : todo) {
    auto r = runner.run(name);
    const auto failed = std::count_if(r.begin(), r.end(), [](const ReportRow& x) { return !x.pass(); });
    summary << name << ": " << r.size() - failed << "/" << r.size() << " rows pass\n";
    for (const auto& x : r) {
      if (!x.pass()) {
        summary << "  FAIL " << x.check_id << " value " << format_double(x.value) << " reference "
                << format_double(x.reference) << " tolerance " << format_double(x.tolerance) << "\n";
      }
    }
    rows.insert(rows.end(), r.begin(), r.end());
  }
  for (const auto& note : runner.notes()) summary << "  note: " << note << "\n";

  const std::string csv = to_csv(rows);
  if (out_path.empty()) {
    out << csv;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << out_path << "'\n";
      return 2;
    }
    f << csv;
  }
  const bool ok = std::all_of(rows.begin(), rows.end(), [](const ReportRow& x) { return x.pass(); });
  return ok ? 0 : 1;
}

}  // namespace susy
