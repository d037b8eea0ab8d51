#include "bures/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "bures/closed_form.hpp"
#include "bures/errors.hpp"
#include "bures/parallel.hpp"
#include "bures/snapshot.hpp"

namespace bures::cli {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double parse_real(const std::string& text, const std::string& what) {
  if (text.empty() || std::isspace(static_cast<unsigned char>(text.front()))) {
    throw UsageError(fmt::format("cannot parse {} '{}'", what, text));
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw UsageError(fmt::format("cannot parse {} '{}'", what, text));
  }
  return v;
}

std::string fmt_complex(Complex z) { return fmt::format("{:.17g}{:+.17g}i", z.real(), z.imag()); }
std::string fmt_real(double v) { return fmt::format("{:.17g}", v); }

// ---- shared option state ---------------------------------------------------

struct StateArgs {
  std::string k = "0";
  double r = 0.0;
  std::optional<double> beta;
  std::optional<double> nbar;
};

struct Settings {
  double tol = kDefaultPhysicalTol;
  int cutoff_ceiling = fock::kDefaultCutoffCeiling;
  std::string base = "oracle";
  std::string methods = "pipeline,printed,oracle";
  std::string g_convention = "difference";
  std::string format = "text";
  unsigned threads = 0;
  std::string config;
};

struct Methods {
  bool pipeline = false;
  bool printed = false;
  bool oracle = false;
};

Methods parse_methods(const std::string& text) {
  Methods m;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "pipeline") {
      m.pipeline = true;
    } else if (item == "printed") {
      m.printed = true;
    } else if (item == "oracle") {
      m.oracle = true;
    } else if (item == "all") {
      m = {true, true, true};
    } else {
      throw UsageError(fmt::format("unknown method '{}' (pipeline, printed, oracle, all)", item));
    }
  }
  if (!m.pipeline && !m.printed && !m.oracle) throw UsageError("no method selected");
  return m;
}

BaseSource parse_base(const std::string& text) {
  if (text == "oracle") return BaseSource::OracleCalibrated;
  if (text == "printed") return BaseSource::PrintedBase;
  if (text == "closed-form") return BaseSource::ClosedForm;
  throw UsageError(fmt::format("unknown base '{}' (oracle, printed, closed-form)", text));
}

GConvention parse_g_convention(const std::string& text) {
  if (text == "difference") return GConvention::Difference;
  if (text == "printed") return GConvention::PrintedConjugate;
  throw UsageError(fmt::format("unknown g convention '{}' (difference, printed)", text));
}

void check_format(const std::string& f, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (f == a) return;
  }
  throw UsageError(fmt::format("unknown format '{}'", f));
}

// Options registered on a subcommand, keyed by config-file name.
using OptionMap = std::map<std::string, CLI::Option*>;

void add_state_options(CLI::App* app, StateArgs& s, int idx) {
  const auto n = std::to_string(idx);
  app->add_option("--k" + n, s.k, "displacement of state " + n + " (a+bi)");
  app->add_option("--r" + n, s.r, "squeezing of state " + n);
  auto* b = app->add_option("--beta" + n, s.beta, "inverse temperature of state " + n);
  auto* nb = app->add_option("--nbar" + n, s.nbar, "mean thermal photon number of state " + n);
  b->excludes(nb);
}

OptionMap add_settings(CLI::App* app, Settings& st, bool formats) {
  OptionMap m;
  m["tol"] = app->add_option("--tol", st.tol, "comparison and oracle convergence tolerance");
  m["cutoff_ceiling"] = app->add_option("--cutoff-ceiling", st.cutoff_ceiling, "largest Fock cutoff");
  m["threads"] = app->add_option("--threads", st.threads, "worker threads (0: all cores)");
  if (formats) {
    m["base"] = app->add_option("--base", st.base, "base factor: oracle, printed, closed-form");
    m["methods"] = app->add_option("--methods", st.methods, "comma list of pipeline, printed, oracle, all");
    m["g_convention"] = app->add_option("--g-convention", st.g_convention, "difference (k2 - k1) or printed (k2 - k1^*)");
  }
  app->add_option("--config", st.config, "key = value file; flags override it");
  return m;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Applies `key = value` lines to every option not given on the command line.
void apply_config(const Settings& st, const OptionMap& options) {
  if (st.config.empty()) return;
  std::ifstream in(st.config);
  if (!in) throw IoError(fmt::format("cannot read config file '{}'", st.config));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(fmt::format("{}:{}: expected key = value", st.config, lineno));
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string value = trim(line.substr(eq + 1));
    const auto it = options.find(key);
    if (it == options.end()) throw UsageError(fmt::format("{}:{}: unknown key '{}'", st.config, lineno, key));
    if (it->second->count() > 0) continue;
    try {
      it->second->add_result(value);
      it->second->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError(fmt::format("{}:{}: {}", st.config, lineno, e.what()));
    }
  }
}

StateParams make_state(const StateArgs& a, int idx) {
  if (a.beta.has_value() == a.nbar.has_value()) {
    throw UsageError(fmt::format("state {}: give exactly one of --beta{} and --nbar{}", idx, idx, idx));
  }
  const Complex k = parse_complex(a.k);
  try {
    return a.beta ? StateParams::from_beta(k, a.r, *a.beta) : StateParams::from_nbar(k, a.r, *a.nbar);
  } catch (const DomainError& e) {
    throw UsageError(fmt::format("state {}: {}", idx, e.what()));
  }
}

FidelityOptions fidelity_options(const Settings& st, const Methods& m) {
  FidelityOptions o;
  o.tol = st.tol;
  o.run_oracle = m.oracle;
  o.run_printed = m.printed;
  o.base_source = parse_base(st.base);
  o.g_convention = parse_g_convention(st.g_convention);
  o.oracle.tol = st.tol;
  o.oracle.cutoff_ceiling = st.cutoff_ceiling;
  return o;
}

// ---- rendering -------------------------------------------------------------

const std::vector<std::string> kCsvColumns = {
    "index", "re_k1", "im_k1", "r1", "beta1", "nbar1", "re_k2", "im_k2", "r2", "beta2", "nbar2", "re_g", "im_g",
    "ratio_pipeline", "base", "base_source", "F_pipeline", "F_printed", "F_oracle", "oracle_cutoff", "oracle_gap",
    "dev_pipeline_oracle", "dev_printed_pipeline", "first_divergent", "flags"};

std::string opt_real(const std::optional<double>& v) { return v ? fmt_real(*v) : std::string{}; }

std::string csv_row(std::size_t index, const StateParams& s1, const StateParams& s2, const FidelityReport& rep,
                    const Methods& m) {
  std::vector<std::string> f;
  f.push_back(std::to_string(index));
  for (const StateParams* s : {&s1, &s2}) {
    f.push_back(fmt_real(s->k().real()));
    f.push_back(fmt_real(s->k().imag()));
    f.push_back(fmt_real(s->r()));
    f.push_back(fmt_real(s->beta()));
    f.push_back(fmt_real(s->nbar()));
  }
  f.push_back(fmt_real(rep.displacement.g.real()));
  f.push_back(fmt_real(rep.displacement.g.imag()));
  f.push_back(fmt_real(std::exp(rep.pipeline.log_ratio)));
  f.push_back(fmt_real(rep.base.base));
  f.push_back(to_string(rep.base.source));
  f.push_back(m.pipeline ? fmt_real(rep.value_matrix_pipeline) : std::string{});
  f.push_back(m.printed ? opt_real(rep.value_printed) : std::string{});
  f.push_back(opt_real(rep.value_oracle));
  f.push_back(rep.oracle ? std::to_string(rep.oracle->cutoff_used) : std::string{});
  f.push_back(rep.oracle ? fmt_real(rep.oracle->convergence_gap) : std::string{});
  f.push_back(rep.value_oracle ? fmt_real(std::abs(*rep.value_oracle - rep.value_matrix_pipeline)) : std::string{});
  f.push_back(rep.value_printed ? fmt_real(std::abs(*rep.value_printed - rep.value_matrix_pipeline)) : std::string{});
  f.push_back(rep.first_divergent);
  std::string flags;
  for (const auto& d : rep.flags) flags += (flags.empty() ? "" : ";") + d.name;
  f.push_back(flags);
  std::string row;
  for (std::size_t i = 0; i < f.size(); ++i) row += (i ? "," : "") + f[i];
  return row + "\n";
}

std::string csv_header(const Settings& st, const std::string& command, const std::vector<Axis>& axes) {
  std::string h = fmt::format("# bures {} {}\n", BURES_VERSION, command);
  h += fmt::format("# tol={} cutoff_ceiling={} base={} methods={} g_convention={}\n", fmt_real(st.tol),
                   st.cutoff_ceiling, st.base, st.methods, st.g_convention);
  if (!axes.empty()) {
    h += "# axes:";
    for (const auto& a : axes) h += fmt::format(" {}={}:{}:{}", a.name, fmt_real(a.start), fmt_real(a.stop), a.count);
    h += "\n";
  }
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) h += (i ? "," : "") + kCsvColumns[i];
  return h + "\n";
}

nlohmann::json state_json(const StateParams& s) {
  return {{"re_k", s.k().real()}, {"im_k", s.k().imag()}, {"r", s.r()}, {"beta", s.beta()}, {"nbar", s.nbar()}};
}

nlohmann::json trace_json(const ReductionTrace& t) {
  return {{"method", to_string(t.method)},
          {"log_delta1", t.log_delta1},
          {"log_delta2", t.log_delta2},
          {"log_ratio", t.log_ratio},
          {"l", {t.l_vec.scalar().real(), t.l_vec.scalar().imag()}},
          {"delta", t.delta_denom},
          {"annihilation_residual", t.annihilation_residual}};
}

nlohmann::json report_json(const StateParams& s1, const StateParams& s2, const FidelityReport& rep, const Methods& m) {
  nlohmann::json j;
  j["version"] = BURES_VERSION;
  j["state1"] = state_json(s1);
  j["state2"] = state_json(s2);
  j["g"] = {rep.displacement.g.real(), rep.displacement.g.imag()};
  j["composition_phase_log"] = {rep.displacement.c_log.real(), rep.displacement.c_log.imag()};
  if (m.pipeline) {
    j["matrix_pipeline"] = {{"value", rep.value_matrix_pipeline},
                            {"log_value", rep.log_value_matrix_pipeline},
                            {"trace", trace_json(rep.pipeline)}};
  }
  if (m.printed) {
    j["printed"] = {{"value", rep.value_printed ? nlohmann::json(*rep.value_printed) : nlohmann::json(nullptr)},
                    {"trace", rep.printed ? trace_json(*rep.printed) : nlohmann::json(nullptr)}};
  }
  nlohmann::json base = {{"source", to_string(rep.base.source)},
                         {"value", rep.base.base},
                         {"y", rep.base.y},
                         {"closed_form", rep.base.closed_form}};
  base["printed"] = rep.base.printed ? nlohmann::json(*rep.base.printed) : nlohmann::json(nullptr);
  base["oracle_calibrated"] =
      rep.base.oracle_calibrated ? nlohmann::json(*rep.base.oracle_calibrated) : nlohmann::json(nullptr);
  j["base"] = base;
  if (rep.oracle) {
    j["oracle"] = {{"value", *rep.value_oracle},
                   {"raw", rep.oracle->fidelity},
                   {"cutoff_used", rep.oracle->cutoff_used},
                   {"convergence_gap", rep.oracle->convergence_gap},
                   {"spectrum_floor", rep.oracle->spectrum_floor},
                   {"clamped_mass", rep.oracle->clamped_mass},
                   {"cutoffs", rep.oracle->cutoffs},
                   {"values", rep.oracle->values}};
  }
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& d : rep.flags) flags.push_back({{"name", d.name}, {"magnitude", d.magnitude}, {"detail", d.detail}});
  j["flags"] = flags;
  j["first_divergent"] = rep.first_divergent;
  return j;
}

void render_text(std::ostream& out, const StateParams& s1, const StateParams& s2, const FidelityReport& rep,
                 const Methods& m) {
  auto state_line = [&](int i, const StateParams& s) {
    out << fmt::format("state {}: k = {:g}{:+g}i  r = {:g}  beta = {:.9g}  nbar = {:.9g}\n", i, s.k().real(),
                       s.k().imag(), s.r(), s.beta(), s.nbar());
  };
  state_line(1, s1);
  state_line(2, s2);
  out << fmt::format("g = {:.9g}{:+.9g}i\n", rep.displacement.g.real(), rep.displacement.g.imag());
  out << fmt::format("ratio delta1/delta2 = {:.9f}   base ({}) = {:.9f}\n", std::exp(rep.pipeline.log_ratio),
                     to_string(rep.base.source), rep.base.base);
  if (m.pipeline) out << fmt::format("matrix-pipeline  {:.9f}\n", rep.value_matrix_pipeline);
  if (m.printed) {
    if (rep.value_printed) {
      out << fmt::format("printed          {:.9f}\n", *rep.value_printed);
    } else {
      out << "printed          undefined (sqrt(Y) <= 1)\n";
    }
  }
  if (rep.oracle) {
    out << fmt::format("oracle           {:.9f}   (cutoff {}, gap {:.2e})\n", *rep.value_oracle,
                       rep.oracle->cutoff_used, rep.oracle->convergence_gap);
  }
  if (!rep.first_divergent.empty()) out << "first divergent printed formula: " << rep.first_divergent << "\n";
  for (const auto& d : rep.flags) out << fmt::format("flag {}: {:.3e}  {}\n", d.name, d.magnitude, d.detail);
}

void report_convergence(std::ostream& err, const ConvergenceError& e) {
  err << "error: " << e.what() << "\n";
  for (std::size_t i = 0; i < e.cutoffs().size(); ++i) {
    err << fmt::format("  cutoff {:>5}", e.cutoffs()[i]);
    if (i < e.gaps().size()) err << fmt::format("  gap {:.3e}", e.gaps()[i]);
    err << "\n";
  }
}

// ---- subcommands -----------------------------------------------------------

int cmd_compute(const StateArgs& a1, const StateArgs& a2, const Settings& st, std::ostream& out) {
  check_format(st.format, {"text", "csv", "record"});
  const Methods m = parse_methods(st.methods);
  const StateParams s1 = make_state(a1, 1);
  const StateParams s2 = make_state(a2, 2);
  const FidelityReport rep = fidelity(s1, s2, fidelity_options(st, m));
  if (st.format == "text") {
    render_text(out, s1, s2, rep, m);
  } else if (st.format == "csv") {
    out << csv_header(st, "compute", {}) << csv_row(0, s1, s2, rep, m);
  } else {
    out << report_json(s1, s2, rep, m).dump(2) << "\n";
  }
  return kOk;
}

bool is_thermal_axis(const std::string& name, int idx) {
  return name == "beta" + std::to_string(idx) || name == "nbar" + std::to_string(idx);
}

int cmd_sweep(const StateArgs& a1, const StateArgs& a2, const Settings& st, const std::vector<std::string>& specs,
              const std::string& out_path, std::ostream& out) {
  const Methods m = parse_methods(st.methods);
  if (specs.empty()) throw UsageError("sweep needs at least one --axis");
  if (specs.size() > 2) throw UsageError("at most 2 swept axes");
  std::vector<Axis> axes;
  for (const auto& s : specs) axes.push_back(parse_axis(s));
  if (axes.size() == 2 && axes[0].name == axes[1].name) throw UsageError("axis '" + axes[0].name + "' given twice");
  for (int idx : {1, 2}) {
    const StateArgs& a = idx == 1 ? a1 : a2;
    int thermal = (a.beta ? 1 : 0) + (a.nbar ? 1 : 0);
    for (const auto& ax : axes) thermal += is_thermal_axis(ax.name, idx) ? 1 : 0;
    if (thermal != 1) {
      throw UsageError(fmt::format("state {}: exactly one of beta{}/nbar{} must be fixed or swept", idx, idx, idx));
    }
  }
  // Validate the fixed complex inputs before any work.
  parse_complex(a1.k);
  parse_complex(a2.k);
  const FidelityOptions fo = fidelity_options(st, m);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError(fmt::format("cannot write '{}'", out_path));
  }

  const std::size_t n0 = axes[0].count;
  const std::size_t n1 = axes.size() > 1 ? axes[1].count : 1;
  const std::size_t total = n0 * n1;
  std::vector<std::string> rows(total);
  parallel_for(
      total,
      [&](std::size_t index) {
        StateArgs b1 = a1, b2 = a2;
        Complex k1 = parse_complex(a1.k), k2 = parse_complex(a2.k);
        const std::size_t pos[2] = {index / n1, index % n1};
        for (std::size_t ai = 0; ai < axes.size(); ++ai) {
          const Axis& ax = axes[ai];
          const double v = ax.value(static_cast<int>(pos[ai]));
          const std::string& nm = ax.name;
          if (nm == "re_k1") k1.real(v);
          else if (nm == "im_k1") k1.imag(v);
          else if (nm == "r1") b1.r = v;
          else if (nm == "beta1") b1.beta = v;
          else if (nm == "nbar1") b1.nbar = v;
          else if (nm == "re_k2") k2.real(v);
          else if (nm == "im_k2") k2.imag(v);
          else if (nm == "r2") b2.r = v;
          else if (nm == "beta2") b2.beta = v;
          else if (nm == "nbar2") b2.nbar = v;
        }
        b1.k = fmt_complex(k1);
        b2.k = fmt_complex(k2);
        const StateParams s1 = make_state(b1, 1);
        const StateParams s2 = make_state(b2, 2);
        rows[index] = csv_row(index, s1, s2, fidelity(s1, s2, fo), m);
      },
      st.threads);

  std::ostream& sink = out_path.empty() ? out : file;
  sink << csv_header(st, "sweep", axes);
  for (const auto& r : rows) sink << r;
  sink.flush();
  if (!sink) throw IoError(fmt::format("write to '{}' failed", out_path.empty() ? "stdout" : out_path));
  return kOk;
}

int cmd_verify(const Settings& st, const std::string& preset, std::ostream& out, std::ostream& err) {
  check_format(st.format, {"text", "json"});
  VerifyOptions vo;
  if (preset == "standard") {
    vo.preset = GridPreset::Standard;
  } else if (preset == "quick") {
    vo.preset = GridPreset::Quick;
  } else {
    throw UsageError(fmt::format("unknown preset '{}' (standard, quick)", preset));
  }
  vo.tol = st.tol;
  vo.oracle.tol = st.tol;
  vo.oracle.cutoff_ceiling = st.cutoff_ceiling;
  vo.threads = st.threads;
  const ReconciliationReport rep = run_verification(vo);
  if (st.format == "text") {
    write_report_text(out, rep);
  } else {
    nlohmann::json j;
    j["version"] = BURES_VERSION;
    j["grid_points"] = rep.grid_points;
    for (const auto& e : rep.entries) {
      j["entries"].push_back({{"formula", e.formula},
                              {"max_abs_deviation", e.max_abs_deviation},
                              {"worst_case", e.worst_case},
                              {"verdict", to_string(e.verdict)},
                              {"note", e.note}});
    }
    for (const auto& c : rep.checks) {
      j["checks"].push_back({{"id", c.id},
                             {"passed", c.passed},
                             {"measured", c.measured},
                             {"threshold", c.threshold},
                             {"detail", c.detail}});
    }
    j["passed"] = rep.passed();
    out << j.dump(2) << "\n";
  }
  if (rep.passed()) return kOk;
  for (const auto& c : rep.checks) {
    if (!c.passed) err << fmt::format("FAIL {}: {:.3e} (threshold {:.1e}) {}\n", c.id, c.measured, c.threshold, c.detail);
  }
  return kVerifyFailed;
}

int cmd_snapshot(const Settings& st, bool regolden, const std::string& out_path, const std::string& check_path,
                 std::ostream& out, std::ostream& err) {
  if (out_path.empty() == check_path.empty()) throw UsageError("snapshot needs exactly one of --out and --check");
  fock::OracleOptions oo;
  oo.tol = st.tol;
  oo.cutoff_ceiling = st.cutoff_ceiling;

  if (!out_path.empty()) {
    if (!regolden) throw UsageError("refusing to regenerate golden files without --regolden");
    const auto points = golden_points();
    std::vector<std::optional<SnapshotRecord>> computed(points.size());
    parallel_for(
        points.size(),
        [&](std::size_t i) {
          const auto res = fock::fidelity_oracle(points[i].s1, points[i].s2, oo);
          computed[i] = SnapshotRecord{points[i].s1, points[i].s2, res.fidelity, res.cutoff_used, oo.tol, BURES_VERSION};
        },
        st.threads);
    std::vector<SnapshotRecord> records;
    for (auto& c : computed) records.push_back(std::move(*c));
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError(fmt::format("cannot write '{}'", out_path));
    write_snapshot(file, records);
    if (!file.flush()) throw IoError(fmt::format("write to '{}' failed", out_path));
    out << fmt::format("wrote {} records to {}\n", records.size(), out_path);
    return kOk;
  }

  std::ifstream in(check_path);
  if (!in) throw IoError(fmt::format("cannot read '{}'", check_path));
  std::vector<SnapshotRecord> records;
  try {
    records = read_snapshot(in);
  } catch (const SnapshotFormatError& e) {
    throw IoError(fmt::format("{}: {}", check_path, e.what()));
  }
  bool ok = true;
  for (const auto& rec : records) {
    fock::OracleOptions ro = oo;
    ro.tol = rec.tol;
    const double f = fock::fidelity_oracle(rec.s1, rec.s2, ro).fidelity;
    const double dev = std::abs(f - rec.fidelity);
    const bool pass = dev <= rec.tol;
    ok = ok && pass;
    out << fmt::format("{} F = {:.17g}  golden {:.17g}  |dev| {:.2e}\n", pass ? "ok  " : "FAIL", f, rec.fidelity, dev);
  }
  if (!ok) err << "snapshot mismatch\n";
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

Complex parse_complex(const std::string& text) {
  const std::string_view s(text);
  if (s.empty() || s.find_first_of(" \t\n") != std::string_view::npos) {
    throw UsageError(fmt::format("cannot parse complex '{}' (expected a+bi)", text));
  }
  if (s.back() != 'i') return {parse_real(text, "complex"), 0.0};
  const std::string body(s.substr(0, s.size() - 1));
  // Split at the last sign that is neither leading nor part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  auto imag_part = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_real(t, "imaginary part of '" + text + "'");
  };
  if (split == std::string::npos) return {0.0, imag_part(body)};
  return {parse_real(body.substr(0, split), "real part of '" + text + "'"), imag_part(body.substr(split))};
}

double Axis::value(int i) const {
  if (count == 1) return start;
  return start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
}

Axis parse_axis(const std::string& text) {
  static const std::vector<std::string> names = {"re_k1", "im_k1", "r1", "beta1", "nbar1",
                                                 "re_k2", "im_k2", "r2", "beta2", "nbar2"};
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError(fmt::format("axis '{}': expected NAME=start:stop:count", text));
  Axis a;
  a.name = text.substr(0, eq);
  if (std::find(names.begin(), names.end(), a.name) == names.end()) {
    throw UsageError(fmt::format("unknown axis '{}'", a.name));
  }
  const std::string range = text.substr(eq + 1);
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
  if (c2 == std::string::npos || range.find(':', c2 + 1) != std::string::npos) {
    throw UsageError(fmt::format("axis '{}': expected NAME=start:stop:count", text));
  }
  a.start = parse_real(range.substr(0, c1), "axis start");
  a.stop = parse_real(range.substr(c1 + 1, c2 - c1 - 1), "axis stop");
  const double count = parse_real(range.substr(c2 + 1), "axis count");
  if (count < 1 || count != std::floor(count) || count > 1e6) {
    throw UsageError(fmt::format("axis '{}': count must be a positive integer", text));
  }
  a.count = static_cast<int>(count);
  return a;
}

std::vector<GridPoint> golden_points() {
  return {
      {StateParams::from_nbar(0.3, 0.2, 0.5), StateParams::from_nbar({0.1, 0.2}, 0.5, 1.0)},
      {StateParams::from_nbar(0.5, 0.3, 0.5), StateParams::from_nbar(0.5, 0.3, 0.5)},
      {StateParams::from_nbar(0.0, 0.0, 0.2), StateParams::from_nbar(1.0, 0.4, 2.0)},
      {StateParams::from_nbar({0.2, -0.1}, 0.9, 1.0), StateParams::from_nbar({0.5, 0.3}, 0.0, 0.2)},
  };
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bures fidelity between displaced squeezed thermal states", "bures"};
  app.set_version_flag("--version", BURES_VERSION);
  app.require_subcommand(1);

  StateArgs a1, a2;
  Settings st;
  std::vector<std::string> axes;
  std::string out_path, check_path, preset = "standard";
  bool regolden = false;

  auto* compute = app.add_subcommand("compute", "evaluate one state pair");
  add_state_options(compute, a1, 1);
  add_state_options(compute, a2, 2);
  const OptionMap compute_opts = add_settings(compute, st, true);
  compute->add_option("--format", st.format, "text, csv or record");

  auto* sweep = app.add_subcommand("sweep", "evaluate a grid of up to two swept parameters");
  add_state_options(sweep, a1, 1);
  add_state_options(sweep, a2, 2);
  const OptionMap sweep_opts = add_settings(sweep, st, true);
  sweep->add_option("--axis", axes, "NAME=start:stop:count (NAME: re_k1 im_k1 r1 beta1 nbar1 and ...2)");
  sweep->add_option("--out", out_path, "output file (default stdout)");

  auto* verify = app.add_subcommand("verify", "three-way verification and reconciliation report");
  const OptionMap verify_opts = add_settings(verify, st, false);
  verify->add_option("--preset", preset, "standard or quick");
  verify->add_option("--format", st.format, "text or json");

  auto* snapshot = app.add_subcommand("snapshot", "write or check golden oracle values");
  const OptionMap snapshot_opts = add_settings(snapshot, st, false);
  snapshot->add_flag("--regolden", regolden, "required to overwrite golden files");
  snapshot->add_option("--out", out_path, "golden file to write");
  snapshot->add_option("--check", check_path, "golden file to recompute and compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (compute->parsed()) {
      apply_config(st, compute_opts);
      return cmd_compute(a1, a2, st, out);
    }
    if (sweep->parsed()) {
      apply_config(st, sweep_opts);
      return cmd_sweep(a1, a2, st, axes, out_path, out);
    }
    if (verify->parsed()) {
      apply_config(st, verify_opts);
      return cmd_verify(st, preset, out, err);
    }
    apply_config(st, snapshot_opts);
    return cmd_snapshot(st, regolden, out_path, check_path, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConvergenceError& e) {
    report_convergence(err, e);
    return kConvergence;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kUsage;
  } catch (const DegenerateInputError& e) {
    err << "degenerate input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage = args;
  std::vector<char*> argv;
  argv.reserve(storage.size() + 1);
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(storage.size()), argv.data(), out, err);
}

}  // namespace bures::cli
