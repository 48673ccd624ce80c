#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gri/conformal.hpp"
#include "gri/eval.hpp"
#include "gri/spacefile.hpp"
#include "gri/verify.hpp"

using nlohmann::ordered_json;
using namespace gri;

namespace {

int code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Syntax:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::Validation:
    case ErrorCode::ShapeMismatch:
      return 2;
    default:
      return 3;
  }
}

Point parse_point(const std::string& text, int dim) {
  Point p;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      p.x.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, "bad point component: " + item);
    }
  }
  if (static_cast<int>(p.x.size()) != dim)
    throw Error(ErrorCode::Validation,
                "point arity " + std::to_string(p.x.size()) +
                    " != dimension " + std::to_string(dim));
  return p;
}

CurvatureParams parse_params(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, "bad parameter value: " + item);
    }
  }
  if (v.size() != 5)
    throw Error(ErrorCode::Validation,
                "curvature parameters need 5 comma-separated values");
  return CurvatureParams{v[0], v[1], v[2], v[3], v[4]};
}

RhoSelector parse_rho(const std::string& text) {
  std::vector<std::string> groups;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '-')) groups.push_back(item);
  if (groups.size() != 10)
    throw Error(ErrorCode::Validation,
                "selector bundle needs 10 dash-separated groups "
                "(2 of length 3, 8 of length 5)");
  RhoSelector rho;
  rho.s1 = parse_sigma_selector(groups[0]);
  rho.s2 = parse_sigma_selector(groups[1]);
  for (int i = 0; i < 8; ++i)
    rho.r[i] = parse_torsion_selector(groups[2 + i]);
  return rho;
}

std::vector<Point> select_points(const SpaceFile& sf,
                                 const std::vector<std::string>& point_args) {
  if (!point_args.empty()) {
    std::vector<Point> pts;
    for (const auto& s : point_args) pts.push_back(parse_point(s, sf.dimension));
    return pts;
  }
  return resolve_points(sf);
}

ordered_json eval_tensor(const TensorField& t, EvalContext& ctx) {
  const int N = t.dim();
  const int rank = t.rank();
  std::vector<int> idx(rank, 0);
  std::function<ordered_json(int)> build = [&](int depth) -> ordered_json {
    ordered_json arr = ordered_json::array();
    for (int k = 0; k < N; ++k) {
      idx[depth] = k;
      if (depth + 1 == rank)
        arr.push_back(ctx.eval(t.at(idx)));
      else
        arr.push_back(build(depth + 1));
    }
    return arr;
  };
  if (rank == 0) return ordered_json::array();
  return build(0);
}

void write_output(const ordered_json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(path);
    if (!out)
      throw Error(ErrorCode::Validation, "cannot write output: " + path);
    out << j.dump(2) << "\n";
  }
}

ordered_json header_json(const SpaceFile& sf, const std::vector<Point>& pts) {
  ordered_json j;
  j["dimension"] = sf.dimension;
  j["coords"] = sf.coords;
  j["points"] = ordered_json::array();
  for (const Point& p : pts) j["points"].push_back(p.x);
  return j;
}

int cmd_tensors(const std::string& input, const std::string& output,
                const std::vector<std::string>& point_args,
                const std::string& params, bool with_curvature, int threads) {
  SpaceFile sf = load_space_file(input);
  std::vector<Point> pts = select_points(sf, point_args);
  ExprPool pool;
  MetricField m = to_metric(pool, sf);
  Geometry geo(m);
  check_nonsingular(geo, pts);
  CurvatureParams prm = parse_params(params);
  ordered_json j = header_json(sf, pts);
  TensorField K = curvature_family(prm, geo);
  RicciContractions rc = ricci_contractions(geo.riemann(), geo);
  RicciContractions kc = ricci_contractions(K, geo);
  j["params"] = {prm.u, prm.u2, prm.v, prm.v2, prm.w};
  j["tensors"] = ordered_json::array();
  std::unique_ptr<ConformalSpace> cs;
  if (with_curvature && m.dim >= 3) cs = std::make_unique<ConformalSpace>(m);
  for (const Point& pt : pts) {
    EvalContext ctx(pool, pt);
    ordered_json t;
    if (!with_curvature) {
      t["g"] = eval_tensor(geo.g(), ctx);
      t["F"] = eval_tensor(geo.F(), ctx);
      t["ginv"] = eval_tensor(geo.ginv(), ctx);
      t["christoffel"] = eval_tensor(geo.christoffel(), ctx);
      t["gamma"] = eval_tensor(geo.gamma(), ctx);
      t["torsion"] = eval_tensor(geo.torsion(), ctx);
    }
    t["riemann"] = eval_tensor(geo.riemann(), ctx);
    t["ricci"] = eval_tensor(rc.down, ctx);
    t["ricci_mixed"] = eval_tensor(rc.mixed, ctx);
    t["scalar"] = ctx.eval(rc.scalar);
    t["K"] = eval_tensor(K, ctx);
    t["K_ricci"] = eval_tensor(kc.down, ctx);
    t["K_scalar"] = ctx.eval(kc.scalar);
    if (cs) t["weyl"] = eval_tensor(cs->weyl(), ctx);
    j["tensors"].push_back(std::move(t));
  }
  (void)threads;
  write_output(j, output);
  return 0;
}

int cmd_thomas(const std::string& input, const std::string& output,
               const std::vector<std::string>& point_args,
               const std::string& rsel) {
  SpaceFile sf = load_space_file(input);
  std::vector<Point> pts = select_points(sf, point_args);
  ExprPool pool;
  MetricField m = to_metric(pool, sf);
  ConformalSpace cs(m);
  check_nonsingular(cs.geometry(), pts);
  std::vector<TorsionSelector> sels;
  if (rsel == "all") {
    for (int key = 0; key < 32; ++key) {
      TorsionSelector r;
      for (int i = 0; i < 5; ++i) r.r[i] = ((key >> i) & 1) + 1;
      sels.push_back(r);
    }
  } else {
    sels.push_back(parse_torsion_selector(rsel));
  }
  ordered_json j = header_json(sf, pts);
  j["invariants"] = ordered_json::array();
  for (const TorsionSelector& r : sels) {
    TensorField t = cs.thomas(r);
    ordered_json rec;
    rec["r"] = to_string(r);
    rec["values"] = ordered_json::array();
    for (const Point& pt : pts) {
      EvalContext ctx(pool, pt);
      rec["values"].push_back(eval_tensor(t, ctx));
    }
    j["invariants"].push_back(std::move(rec));
  }
  write_output(j, output);
  return 0;
}

int cmd_weyl(const std::string& input, const std::string& output,
             const std::vector<std::string>& point_args,
             const std::string& rho_arg, const std::string& params,
             uint64_t seed) {
  SpaceFile sf = load_space_file(input);
  std::vector<Point> pts = select_points(sf, point_args);
  ExprPool pool;
  MetricField m = to_metric(pool, sf);
  ConformalSpace cs(m);
  check_nonsingular(cs.geometry(), pts);
  CurvatureParams prm = parse_params(params);
  std::vector<RhoSelector> rhos;
  if (rho_arg.rfind("random:", 0) == 0) {
    int count = 0;
    try {
      count = std::stoi(rho_arg.substr(7));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, "bad selector count: " + rho_arg);
    }
    if (count <= 0 || count > 1000)
      throw Error(ErrorCode::Validation, "selector count must be in 1..1000");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> bit(1, 2);
    for (int k = 0; k < count; ++k) {
      RhoSelector rho;
      for (int i = 0; i < 3; ++i) rho.s1.s[i] = bit(rng);
      for (int i = 0; i < 3; ++i) rho.s2.s[i] = bit(rng);
      for (auto& r : rho.r)
        for (int i = 0; i < 5; ++i) r.r[i] = bit(rng);
      rhos.push_back(rho);
    }
  } else {
    rhos.push_back(parse_rho(rho_arg));
  }
  ordered_json j = header_json(sf, pts);
  j["params"] = {prm.u, prm.u2, prm.v, prm.v2, prm.w};
  j["invariants"] = ordered_json::array();
  for (const RhoSelector& rho : rhos) {
    TensorField c = cs.weyl_type(rho, prm);
    ordered_json rec;
    rec["rho"] = to_string(rho);
    rec["values"] = ordered_json::array();
    for (const Point& pt : pts) {
      EvalContext ctx(pool, pt);
      rec["values"].push_back(eval_tensor(c, ctx));
    }
    j["invariants"].push_back(std::move(rec));
  }
  write_output(j, output);
  return 0;
}

int cmd_verify(const std::string& input, const std::string& report_path,
               const std::vector<std::string>& tol_args, uint64_t seed,
               int dim, double eps, int point_count, bool corrupt,
               bool auto_psi, int threads) {
  Tolerances tol;
  for (const std::string& t : tol_args) {
    auto pos = t.find('=');
    if (pos == std::string::npos)
      throw Error(ErrorCode::Validation, "tolerance override needs NAME=VALUE");
    try {
      tol[t.substr(0, pos)] = std::stod(t.substr(pos + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, "bad tolerance value: " + t);
    }
  }
  VerificationReport report;
  if (!input.empty()) {
    SpaceFile sf = load_space_file(input);
    ExprPool pool;
    MetricField m = to_metric(pool, sf);
    InstanceSpec spec;
    spec.dim = sf.dimension;
    spec.seed = seed;
    spec.points = point_count;
    Expr psi = m.psi;
    if (!psi.valid()) {
      if (!auto_psi)
        throw Error(ErrorCode::Validation,
                    "space file has no psi; pass --auto-psi to generate one");
      psi = random_psi(pool, spec);
    }
    std::vector<Point> pts = select_points(sf, {});
    report = run_suite_on(m, psi, pts, spec, tol, threads, corrupt);
  } else {
    InstanceSpec spec;
    spec.dim = dim;
    spec.eps = eps;
    spec.seed = seed;
    spec.points = point_count;
    report = run_suite(spec, tol, threads);
  }
  std::string json = report_to_json(report);
  if (report_path.empty() || report_path == "-") {
    std::cout << json;
  } else {
    std::ofstream out(report_path);
    if (!out)
      throw Error(ErrorCode::Validation, "cannot write report: " + report_path);
    out << json;
  }
  return report.all_pass() ? 0 : 1;
}

int cmd_detect(const std::string& input_a, const std::string& input_b,
               const std::vector<std::string>& point_args,
               const std::string& output) {
  SpaceFile sa = load_space_file(input_a);
  SpaceFile sb = load_space_file(input_b);
  std::vector<Point> pts = select_points(sa, point_args);
  ExprPool pool;
  MetricField A = to_metric(pool, sa);
  MetricField B = to_metric(pool, sb);
  DetectResult res = detect_conformal(A, B, pts);
  ordered_json j;
  j["conformal"] = res.conformal;
  j["thomas_invariants_equal"] = res.thomas_equal;
  j["psi_values"] = res.psi_values;
  j["skipped_points"] = res.skipped_points;
  if (!res.witness.empty()) j["witness"] = res.witness;
  write_output(j, output);
  return res.conformal ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Symbolic-numeric tensors and conformal invariants of generalized "
      "Riemannian spaces"};
  app.require_subcommand(1);

  std::string input, input_b, output, params = "0,0,0,0,0", rsel = "all";
  std::string rho_arg = "random:5";
  std::vector<std::string> point_args, tol_args;
  uint64_t seed = 0;
  int threads = 0, dim = 3, point_count = 10;
  double eps = 0.1;
  bool corrupt = false, auto_psi = false;

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* opt = sub->add_option("--input", input, "space file (JSON)");
    if (needs_input) opt->required();
    sub->add_option("--output", output, "output path (default stdout)");
    sub->add_option("--point", point_args,
                    "evaluation point \"v1,v2,...\" (repeatable)");
    sub->add_option("--threads", threads, "evaluation threads (0 = default)");
  };

  CLI::App* tensors = app.add_subcommand(
      "tensors", "metric split, connection and curvature tensors per point");
  add_common(tensors, true);
  tensors->add_option("--params", params, "curvature family u,u',v,v',w");

  CLI::App* curvature = app.add_subcommand(
      "curvature", "curvature tensors, contractions and conformal curvature");
  add_common(curvature, true);
  curvature->add_option("--params", params, "curvature family u,u',v,v',w");

  CLI::App* thomas = app.add_subcommand(
      "thomas", "connection-level conformal invariants");
  add_common(thomas, true);
  thomas->add_option("--r", rsel, "5-character selector of 1|2, or \"all\"");

  CLI::App* weyl = app.add_subcommand(
      "weyl", "curvature-level conformal invariant family");
  add_common(weyl, true);
  weyl->add_option("--rho", rho_arg,
                   "selector bundle sss-sss-rrrrr(x8) or random:K");
  weyl->add_option("--params", params, "curvature family u,u',v,v',w");
  weyl->add_option("--seed", seed, "seed for random selectors");

  CLI::App* verify = app.add_subcommand(
      "verify", "run the invariance suite and write a report");
  verify->add_option("--input", input, "space file with psi (optional)");
  verify->add_option("--report,--output", output, "report path (default stdout)");
  verify->add_option("--tol", tol_args, "tolerance override NAME=VALUE")
      ->take_all();
  verify->add_option("--seed", seed, "instance seed");
  verify->add_option("--dim", dim, "dimension for generated instances (2..4)");
  verify->add_option("--eps", eps, "perturbation amplitude");
  verify->add_option("--points", point_count, "sample point count");
  verify->add_option("--threads", threads, "evaluation threads");
  verify->add_flag("--corrupt", corrupt,
                   "perturb the image non-conformally (falsification control)");
  verify->add_flag("--auto-psi", auto_psi,
                   "generate a seeded psi when the file has none");

  CLI::App* detect = app.add_subcommand(
      "detect", "decide whether two spaces are conformally related");
  detect->add_option("input_a", input, "first space file")->required();
  detect->add_option("input_b", input_b, "second space file")->required();
  detect->add_option("--point", point_args,
                     "evaluation point \"v1,v2,...\" (repeatable)");
  detect->add_option("--output", output, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (tensors->parsed())
      return cmd_tensors(input, output, point_args, params, false, threads);
    if (curvature->parsed())
      return cmd_tensors(input, output, point_args, params, true, threads);
    if (thomas->parsed()) return cmd_thomas(input, output, point_args, rsel);
    if (weyl->parsed())
      return cmd_weyl(input, output, point_args, rho_arg, params, seed);
    if (verify->parsed())
      return cmd_verify(input, output, tol_args, seed, dim, eps, point_count,
                        corrupt, auto_psi, threads);
    if (detect->parsed())
      return cmd_detect(input, input_b, point_args, output);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
