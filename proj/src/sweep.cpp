#include "nfisac/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

namespace nfisac {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

using nlohmann::json;

const json& need(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key))
    throw config_error("config: missing field " + path + "." + key);
  return j.at(key);
}

double need_number(const json& j, const char* key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_number())
    throw config_error("config: field " + path + "." + key + " must be a number");
  return v.get<double>();
}

std::vector<double> need_number_list(const json& j, const char* key,
                                     const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_array() || v.empty())
    throw config_error("config: field " + path + "." + key +
                       " must be a nonempty array");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number())
      throw config_error("config: field " + path + "." + key +
                         " must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

Method parse_method(const std::string& s) {
  if (s == "isotropic") return Method::Isotropic;
  if (s == "closed_form") return Method::ClosedForm;
  if (s == "vqf") return Method::Vqf;
  if (s == "oracle") return Method::Oracle;
  throw config_error("config: unknown method \"" + s + "\"");
}

int thread_count() {
  if (const char* env = std::getenv("NFISAC_THREADS")) {
    int n = std::atoi(env);
    if (n < 1)
      throw config_error("NFISAC_THREADS must be a positive integer");
    return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

} // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Isotropic: return "isotropic";
    case Method::ClosedForm: return "closed_form";
    case Method::Vqf: return "vqf";
    case Method::Oracle: return "oracle";
  }
  return "?";
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: JSON parse error: ") + e.what());
  }
  SweepConfig cfg;
  const json& sc = need(doc, "scenario", "");
  cfg.f_c_hz = need_number(sc, "f_c_hz", "scenario");
  cfg.noise_power_w = dbm_to_watt(need_number(sc, "noise_dbm", "scenario"));
  cfg.snapshots = static_cast<int>(need_number(sc, "snapshots", "scenario"));
  if (cfg.snapshots < 1) throw config_error("config: scenario.snapshots must be >= 1");
  if (sc.contains("alpha_s")) {
    const json& as = sc.at("alpha_s");
    double mag = need_number(as, "magnitude", "scenario.alpha_s");
    double ph = need_number(as, "phase_deg", "scenario.alpha_s") * kPi / 180.0;
    cfg.alpha_s = std::polar(mag, ph);
  }
  cfg.p_max_w = dbm_to_watt(need_number(sc, "p_max_dbm", "scenario"));
  cfg.gamma_min =
      sc.contains("gamma_min_db")
          ? db_to_linear(need_number(sc, "gamma_min_db", "scenario"))
          : 0.0;

  const json& ar = need(doc, "array", "");
  cfg.array_type = need(ar, "type", "array").get<std::string>();
  if (cfg.array_type != "uca" && cfg.array_type != "upa_same_aperture")
    throw config_error("config: array.type must be uca or upa_same_aperture");
  cfg.n_t = static_cast<int>(need_number(ar, "n_t", "array"));
  cfg.n_r = static_cast<int>(need_number(ar, "n_r", "array"));
  if (ar.contains("spacing")) cfg.spacing = ar.at("spacing").get<double>();
  if (ar.contains("radius")) cfg.radius = ar.at("radius").get<double>();

  const json& tg = need(doc, "target", "");
  cfg.rho_list = need_number_list(tg, "rho", "target");
  cfg.phi_list = need_number_list(tg, "phi_deg", "target");
  for (double& p : cfg.phi_list) p *= kPi / 180.0;
  cfg.y_list = need_number_list(tg, "y", "target");

  if (doc.contains("user")) {
    const json& us = doc.at("user");
    cfg.user_rho = need_number(us, "rho", "user");
    cfg.user_phi = need_number(us, "phi_deg", "user") * kPi / 180.0;
    cfg.user_y = us.contains("y") ? us.at("y").get<double>() : 0.0;
  }

  const json& sw = need(doc, "sweep", "");
  std::string axis = need(sw, "axis", "sweep").get<std::string>();
  if (axis == "n_r") cfg.axis = SweepAxis::Nr;
  else if (axis == "p_max_dbm") cfg.axis = SweepAxis::PMaxDbm;
  else if (axis == "rho") cfg.axis = SweepAxis::Rho;
  else if (axis == "f_c_hz") cfg.axis = SweepAxis::Fc;
  else if (axis == "array_type") cfg.axis = SweepAxis::ArrayType;
  else throw config_error("config: unknown sweep.axis \"" + axis + "\"");
  if (cfg.axis == SweepAxis::ArrayType) {
    const json& labels = need(sw, "labels", "sweep");
    if (!labels.is_array() || labels.empty())
      throw config_error("config: sweep.labels must be a nonempty array");
    for (const json& l : labels) {
      std::string s = l.get<std::string>();
      if (s != "uca" && s != "upa_same_aperture")
        throw config_error("config: sweep.labels entries must be array types");
      cfg.sweep_labels.push_back(s);
    }
  } else {
    cfg.sweep_values = need_number_list(sw, "values", "sweep");
  }

  const json& me = need(doc, "methods", "");
  if (!me.is_array() || me.empty())
    throw config_error("config: methods must be a nonempty array");
  for (const json& m : me) cfg.methods.push_back(parse_method(m.get<std::string>()));

  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("out")) cfg.out_path = doc.at("out").get<std::string>();
  return cfg;
}

namespace {

struct Point {
  Scenario sc;
  AntennaLayout lt, lr;
  TargetState target;
  TargetState user;
  double sweep_value = 0.0;
  std::string sweep_label;
};

AntennaLayout make_layout(const std::string& type, int n, const SweepConfig& cfg,
                          double wavelength) {
  double d = cfg.spacing ? *cfg.spacing : wavelength / 2.0;
  double r = cfg.radius ? *cfg.radius : radius_from_spacing(n, d);
  if (type == "uca") return uca_layout(n, r);
  return upa_same_aperture(n, r);
}

Point make_point(const SweepConfig& cfg, double value, const std::string& label) {
  Point pt;
  pt.sweep_value = value;
  pt.sweep_label = label;
  double f_c = cfg.f_c_hz;
  double p_max = cfg.p_max_w;
  double rho = cfg.rho_list.front();
  int n_r = cfg.n_r;
  std::string type = cfg.array_type;
  switch (cfg.axis) {
    case SweepAxis::Nr: n_r = static_cast<int>(value); break;
    case SweepAxis::PMaxDbm: p_max = dbm_to_watt(value); break;
    case SweepAxis::Rho: rho = value; break;
    case SweepAxis::Fc: f_c = value; break;
    case SweepAxis::ArrayType: type = label; break;
  }
  pt.sc.wavelength = kSpeedOfLight / f_c;
  pt.sc.noise_power = cfg.noise_power_w;
  pt.sc.snapshots = cfg.snapshots;
  pt.sc.alpha_s = cfg.alpha_s;
  pt.sc.p_max = p_max;
  pt.sc.gamma_min = cfg.gamma_min;
  pt.lt = make_layout(type, cfg.n_t, cfg, pt.sc.wavelength);
  pt.lr = make_layout(type, n_r, cfg, pt.sc.wavelength);
  pt.target = TargetState{rho, cfg.phi_list.front(), cfg.y_list.front()};
  pt.user = TargetState{cfg.user_rho, cfg.user_phi, cfg.user_y};
  return pt;
}

void fill_from_report(ResultRow& row, const FimReport& rep,
                      const TargetState& target) {
  row.crb_rho = rep.crbs[0];
  row.crb_phi = rep.crbs[1];
  if (target.y != 0.0) row.crb_y = rep.crbs[2];
  row.speb_m2 = rep.speb;
  row.speb_db = 10.0 * std::log10(rep.speb);
}

ResultRow evaluate_point(const Point& pt, Method method, std::uint64_t seed) {
  ResultRow row;
  row.sweep_value = pt.sweep_value;
  row.sweep_label = pt.sweep_label;
  row.method = method;
  row.inside_aperture = pt.target.rho < pt.lt.radius;
  auto t0 = std::chrono::steady_clock::now();
  try {
    switch (method) {
      case Method::Isotropic: {
        fill_from_report(row, isotropic_baseline(pt.sc, pt.lt, pt.lr, pt.target),
                         pt.target);
        break;
      }
      case Method::ClosedForm: {
        DecompositionSet dec =
            decomposition_vectors(pt.lt, pt.lr, pt.target, pt.sc);
        Eigen::VectorXcd h_c = comm_channel(pt.lt, pt.user, pt.sc.wavelength);
        Eigen::VectorXcd w = closed_form_beamformer(dec.vectors[0], h_c, pt.sc);
        Eigen::MatrixXcd r_x = w * w.adjoint();
        fill_from_report(row, fim_report(r_x, pt.sc, pt.lt, pt.lr, pt.target),
                         pt.target);
        break;
      }
      case Method::Vqf: {
        DecompositionSet dec =
            decomposition_vectors(pt.lt, pt.lr, pt.target, pt.sc);
        Eigen::VectorXcd h_c = comm_channel(pt.lt, pt.user, pt.sc.wavelength);
        BeamformerResult res =
            vqf_solve(dec, h_c, pt.sc, pt.lt, pt.lr, pt.target);
        row.iterations = res.iterations;
        Eigen::MatrixXcd r_x = res.w * res.w.adjoint();
        fill_from_report(row, fim_report(r_x, pt.sc, pt.lt, pt.lr, pt.target),
                         pt.target);
        break;
      }
      case Method::Oracle: {
        DecompositionSet dec =
            decomposition_vectors(pt.lt, pt.lr, pt.target, pt.sc);
        Eigen::VectorXcd h_c = comm_channel(pt.lt, pt.user, pt.sc.wavelength);
        OracleResult res = oracle_search(dec, h_c, pt.sc, seed);
        Eigen::MatrixXcd r_x = res.w * res.w.adjoint();
        fill_from_report(row, fim_report(r_x, pt.sc, pt.lt, pt.lr, pt.target),
                         pt.target);
        break;
      }
    }
  } catch (const std::exception& e) {
    row.status = sanitize(e.what());
  }
  row.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  return row;
}

} // namespace

std::vector<ResultRow> run_sweep(const SweepConfig& config) {
  struct Task {
    Point pt;
    Method method;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  size_t n_values = config.axis == SweepAxis::ArrayType
                        ? config.sweep_labels.size()
                        : config.sweep_values.size();
  if (n_values == 0) throw config_error("run_sweep: empty sweep axis");
  for (size_t v = 0; v < n_values; ++v) {
    double value = config.axis == SweepAxis::ArrayType
                       ? static_cast<double>(v)
                       : config.sweep_values[v];
    std::string label = config.axis == SweepAxis::ArrayType
                            ? config.sweep_labels[v]
                            : "";
    Point pt = make_point(config, value, label);
    for (Method m : config.methods)
      // per-task seed: stable under reordering of completions
      tasks.push_back({pt, m, config.seed * 1000003 + tasks.size()});
  }
  std::vector<ResultRow> rows(tasks.size());
  int n_threads = std::min<int>(thread_count(), static_cast<int>(tasks.size()));
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
      rows[i] = evaluate_point(tasks[i].pt, tasks[i].method, tasks[i].seed);
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return rows;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "sweep_value,sweep_label,method,crb_rho,crb_phi,crb_y,speb_m2,"
         "speb_db,iterations,inside_aperture,status\n";
  for (const ResultRow& r : rows) {
    out << num(r.sweep_value) << ',' << sanitize(r.sweep_label) << ','
        << method_name(r.method) << ',' << num(r.crb_rho) << ','
        << num(r.crb_phi) << ',' << (r.crb_y ? num(*r.crb_y) : "") << ','
        << num(r.speb_m2) << ',' << num(r.speb_db) << ',' << r.iterations << ','
        << (r.inside_aperture ? 1 : 0) << ',' << sanitize(r.status) << '\n';
  }
  return out.str();
}

void write_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("write_csv: cannot open " + path);
  out << rows_to_csv(rows);
}

// --- built-in validation suite -------------------------------------------------

namespace {

ValidationCheck check(const std::string& name, bool passed,
                      const std::string& detail) {
  return ValidationCheck{name, passed, detail};
}

void run_all_checks(std::vector<ValidationCheck>& out) {
  const double lambda = kSpeedOfLight / 28e9;
  Scenario sc;
  sc.wavelength = lambda;
  sc.noise_power = dbm_to_watt(-113);
  sc.snapshots = 16;
  sc.alpha_s = cxd(1.0, 0.0);
  sc.p_max = dbm_to_watt(25);
  sc.gamma_min = 0.0;

  // derivative checks against central finite differences
  for (bool coplanar : {true, false}) {
    std::mt19937_64 rng(coplanar ? 11 : 12);
    std::uniform_real_distribution<double> rho(0.05, 3.0), ang(-kPi, kPi),
        ys(0.2, 2.0);
    AntennaLayout l = uca_layout(24, 0.25);
    double worst = 0.0;
    int done = 0;
    while (done < 20) {
      TargetState t{rho(rng), ang(rng), coplanar ? 0.0 : ys(rng)};
      if (std::abs(t.rho / l.radius - 1.0) < 0.05) continue;
      auto derivs = steering_derivatives(l, t, lambda);
      for (size_t c = 0; c < derivs.size(); ++c) {
        double h = 1e-6 * (c == 1 ? 1.0 : std::max(t.rho, 0.1));
        TargetState lo = t, hi = t;
        (c == 0 ? lo.rho : c == 1 ? lo.phi : lo.y) -= h;
        (c == 0 ? hi.rho : c == 1 ? hi.phi : hi.y) += h;
        Eigen::VectorXcd fd =
            (steering(l, hi, lambda) - steering(l, lo, lambda)) / (2 * h);
        worst = std::max(worst, (derivs[c] - fd).norm() / fd.norm());
      }
      ++done;
    }
    out.push_back(check(coplanar ? "derivatives-fd-coplanar"
                                 : "derivatives-fd-noncoplanar",
                        worst < 1e-4,
                        "worst rel err " + num(worst) + " over 20 configs"));
  }

  // special-function anchors
  out.push_back(check("special-upsilon-anchor",
                      std::abs(upsilon(1.0) - 2.0 / kPi) < 1e-8 &&
                          std::abs(upsilon(0.5) - 0.258657904611) < 1e-8,
                      "Upsilon(1), Upsilon(0.5) vs frozen quadrature values"));
  out.push_back(check("special-elliptic-anchor",
                      std::abs(elliptic_k(std::sqrt(0.5)) - 1.854074677301372) <
                          1e-12,
                      "K(sqrt(1/2)) vs frozen reference"));

  // norm identities, closed vs direct, N = 128
  {
    AntennaLayout l = uca_layout(128, 0.25);
    double worst = 0.0;
    for (double ratio : {0.4, 2.2}) {
      TargetState t = TargetState::coplanar(ratio * 0.25, 0.61);
      CoplanarNorms c = norms_coplanar(l, t);
      CoplanarNorms d = norms_coplanar_direct(l, t);
      worst = std::max({worst, std::abs(c.sum_v2 / d.sum_v2 - 1),
                        std::abs(c.sumsq_v2 / d.sumsq_v2 - 1),
                        std::abs(c.sumsq_v1 / d.sumsq_v1 - 1)});
    }
    out.push_back(check("norm-identities-coplanar", worst <= 0.02,
                        "worst rel err " + num(worst)));
  }
  {
    AntennaLayout l = uca_layout(128, 0.25);
    TargetState t = TargetState::noncoplanar(1.0, 0.43, 0.5);
    NonCoplanarNorms c = norms_noncoplanar(l, t);
    NonCoplanarNorms d = norms_noncoplanar_direct(l, t);
    double worst = std::max({std::abs(c.sumsq_v22 / d.sumsq_v22 - 1),
                             std::abs(c.sum_v23 / d.sum_v23 - 1),
                             std::abs(c.sumsq_v23 / d.sumsq_v23 - 1)});
    out.push_back(check("norm-identities-noncoplanar", worst <= 0.02,
                        "worst rel err " + num(worst)));
    AuxNonCoplanar aux = aux_noncoplanar(l, t);
    double z1 = std::abs(d.sum_v22) / aux.v22.array().abs().sum();
    double z2 = std::abs(d.sum_v21_v22) /
                (aux.v21.array() * aux.v22.array()).abs().sum();
    out.push_back(check("norm-zero-identities", z1 < 1e-3 && z2 < 1e-3,
                        "residuals " + num(z1) + ", " + num(z2)));
  }

  // diagonal FIM approximation
  {
    AntennaLayout l = uca_layout(64, 0.25);
    Eigen::MatrixXcd r_iso =
        sc.p_max / 64.0 * Eigen::MatrixXcd::Identity(64, 64);
    double worst = 0.0;
    for (double ratio : {0.4, 0.7, 1.5, 2.5}) {
      Eigen::MatrixXd pos = eliminate_nuisance(
          fim_numeric(r_iso, sc, l, l, TargetState::coplanar(ratio * 0.25, 0.7)));
      worst = std::max(worst,
                       std::abs(pos(0, 1)) / std::sqrt(pos(0, 0) * pos(1, 1)));
    }
    out.push_back(check("fim-diagonal-approx", worst < 0.05,
                        "worst correlation " + num(worst)));
  }

  // closed-form vs numeric CRBs
  {
    AntennaLayout l = uca_layout(64, 0.25);
    Eigen::MatrixXcd r_iso =
        sc.p_max / 64.0 * Eigen::MatrixXcd::Identity(64, 64);
    double worst = 0.0;
    {
      TargetState t = TargetState::coplanar(0.6, -1.1);
      CoplanarCrb cf = crb_coplanar_closed(sc, l, l, t, r_iso);
      Eigen::Vector2d nume =
          eliminate_nuisance(fim_numeric(r_iso, sc, l, l, t)).inverse().diagonal();
      worst = std::max({worst, std::abs(cf.crb_rho / nume[0] - 1),
                        std::abs(cf.crb_phi / nume[1] - 1)});
    }
    {
      TargetState t = TargetState::noncoplanar(1.0, 0.52, 0.4);
      NonCoplanarCrb cf = crb_noncoplanar_closed(sc, l, l, t, r_iso);
      Eigen::Vector3d nume =
          eliminate_nuisance(fim_numeric(r_iso, sc, l, l, t)).inverse().diagonal();
      worst = std::max({worst, std::abs(cf.crb_rho / nume[0] - 1),
                        std::abs(cf.crb_phi / nume[1] - 1),
                        std::abs(cf.crb_y / nume[2] - 1)});
    }
    out.push_back(check("crb-closed-vs-numeric", worst < 0.10,
                        "worst rel dev " + num(worst)));
  }

  // SPEB projection determinant identity
  {
    TargetState t = TargetState::coplanar(1.7, 0.9);
    double det = projection_t(t).determinant();
    out.push_back(check("speb-projection-det",
                        std::abs(det - 1.0 / t.rho) < 1e-12,
                        "det(T) - 1/rho = " + num(det - 1.0 / t.rho)));
  }

  // closed-form beamformer vs oracle, and VQF behavior
  {
    AntennaLayout l = uca_layout(32, 0.25);
    TargetState t = TargetState::coplanar(0.6, kPi / 6);
    Eigen::VectorXcd h_c =
        comm_channel(l, TargetState::coplanar(1.5, -kPi / 4), lambda);
    Scenario s2 = sc;
    s2.gamma_min = 0.5 * s2.p_max * h_c.squaredNorm() / s2.noise_power;
    DecompositionSet dec = decomposition_vectors(l, l, t, s2);
    DecompositionSet one;
    one.vectors = {dec.vectors[0]};
    one.weights = Eigen::VectorXd::Constant(1, 1.0);
    Eigen::VectorXcd w = closed_form_beamformer(dec.vectors[0], h_c, s2);
    OracleResult best = oracle_search(one, h_c, s2, 17);
    double gap = std::abs(best.objective / surrogate_objective(one, w) - 1);
    out.push_back(check("beamformer-closed-vs-oracle", gap < 1e-4,
                        "oracle gap " + num(gap)));

    BeamformerResult res = vqf_solve(dec, h_c, s2, l, l, t);
    bool monotone = true;
    for (size_t k = 1; k < res.objective_trace.size(); ++k)
      if (res.objective_trace[k] >
          res.objective_trace[k - 1] * (1 + 1e-9))
        monotone = false;
    OracleResult full = oracle_search(dec, h_c, s2, 18);
    double vgap = res.objective_trace.back() / full.objective - 1.0;
    out.push_back(check("vqf-monotone-convergence",
                        monotone && res.termination != Termination::MaxIters &&
                            vgap <= 0.15,
                        "monotone " + std::string(monotone ? "yes" : "no") +
                            ", oracle gap " + num(vgap)));
  }
}

} // namespace

std::vector<ValidationCheck> validate(const std::string& filter) {
  std::vector<ValidationCheck> all;
  run_all_checks(all);
  if (filter.empty()) return all;
  std::vector<ValidationCheck> kept;
  for (ValidationCheck& c : all)
    if (c.name.find(filter) != std::string::npos) kept.push_back(std::move(c));
  return kept;
}

} // namespace nfisac
