#include "kdyn/run.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

namespace kdyn {

namespace fs = std::filesystem;

namespace {

struct Output {
  fs::path dir;
  std::vector<fs::path> files;

  void write(const std::string& name, const std::string& content) {
    write_atomic(dir / name, content);
    files.push_back(dir / name);
  }
  void json(const std::string& name, const Json& j) { write(name, dump(j)); }
  void series(const std::string& name, const std::vector<double>& ys) {
    std::ostringstream os;
    os.precision(17);
    os << "step,value\n";
    for (std::size_t i = 0; i < ys.size(); ++i) os << i << ',' << ys[i] << '\n';
    write(name, os.str());
  }
  Json names() const {
    Json a = Json::array();
    for (const auto& f : files) a.push_back(f.filename().string());
    return a;
  }
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json measure_json(const CellMeasure& mu) {
  Json j = {{"depth", mu.depth}, {"masses", mu.masses}};
  if (mu.exact) {
    Json e = Json::array();
    for (const auto& x : *mu.exact) e.push_back(rational_json(x));
    j["exact"] = e;
  }
  return j;
}

Json clusters_json(const std::vector<Cluster>& cs) {
  Json a = Json::array();
  for (const auto& c : cs) a.push_back({{"lo", rational_json(c.lo)}, {"hi", rational_json(c.hi)}, {"size", c.size}});
  return a;
}

std::vector<Rational> cell_endpoints(const CompactSet& k, int depth) {
  std::vector<Rational> out;
  for (const auto& c : partition_cells(k, depth)) {
    out.push_back(c.lo);
    out.push_back(c.hi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Re-reads a written certificate and checks it from the file alone.
Verdict recheck(const fs::path& p) { return verify_certificate(parse_json(read_file(p))).verdict; }

struct Ctx {
  const Scenario& s;
  Budget b;
  std::uint64_t seed;
  Output out;
  bool series;
  Json result = Json::object();
  std::string status = "completed";
};

RunResult simulate(Ctx& c) {
  const WalkModel model = build_model(c.s).with_seed(c.seed);
  const auto& k = *model.space();
  const Rational delta = k.diameter() / 9;
  const int depth = c.b.depth;

  auto mu = estimate_stationary_measure(model, c.b.steps, depth, 4);
  const int cell_depth = k.structured() ? std::max(1, depth - 2) : -1;
  auto res = invariance_residual(mu, model, cell_depth);
  auto ent = estimate_entropy(mu, model);
  auto dich = dichotomy(model, c.b.runs, delta, c.b.n);
  auto bc = backward_cluster(model, k.min(), c.b.n, c.b.runs, c.b.radius);
  auto ds = delta_sum_statistic(model, {k.min(), k.max()}, c.b.n, c.b.runs);
  Trajectory t(model, c.seed);
  auto pair = classify_pair(t, k.min(), k.max(), delta, c.b.n);

  std::size_t single = 0;
  for (auto n : bc.counts) single += n == 1;
  c.result["stationary"] = measure_json(mu);
  c.result["residual"] = {{"average", res.average},  {"generator", res.generator}, {"cell_depth", cell_depth},
                          {"checked", res.checked}, {"skipped", res.skipped}};
  c.result["entropy"] = {{"h", ent.h_estimate}, {"per_generator", ent.per_generator}, {"depth", ent.depth},
                         {"exact_zero", ent.exact_zero}, {"skipped_cells", ent.skipped_cells}};
  c.result["dichotomy"] = {{"delta", rational_json(dich.delta)}, {"synchronized", dich.synchronized},
                           {"separated", dich.separated},       {"undecided", dich.undecided},
                           {"lambda_fit", dich.lambda_fit},     {"horizon", dich.horizon}};
  c.result["backward_cluster"] = {{"x", rational_json(k.min())}, {"radius", rational_json(bc.radius)},
                                  {"counts", bc.counts},         {"single_cluster_runs", single}};
  c.result["delta_sum"] = {{"tuple", Json::array({rational_json(k.min()), rational_json(k.max())})},
                           {"mean", ds.mean},
                           {"last_quarter_increment", ds.last_quarter_increment}};
  c.result["extreme_pair"] = {{"verdict", to_string(pair.verdict)}, {"slope", pair.slope},
                              {"final_distance", rational_json(pair.final_distance)}};
  if (k.structured()) {
    auto scan = contraction_scan(t, depth, c.b.n, delta);
    auto gc = global_contraction_report(t, depth, c.b.n, c.b.eps, c.b.p_cap);
    c.result["contraction_scan"] = {{"attractors", scan.attractors}, {"repulsors", scan.repulsors},
                                    {"bound_holds", scan.bound_holds}, {"delta", rational_json(scan.delta)}};
    Json cover = Json::array();
    for (const auto& ball : gc.cover)
      cover.push_back({{"center", rational_json(ball.center)}, {"radius", rational_json(ball.radius)}});
    c.result["global_contraction"] = {{"F", points_json(gc.F)},
                                      {"p", gc.p ? Json(*gc.p) : Json(nullptr)},
                                      {"lambda_fit", gc.lambda_fit},
                                      {"cover", cover},
                                      {"eps", rational_json(gc.eps)},
                                      {"diagnostics", gc.diagnostics}};
    auto acc = break_accumulation(t, c.b.n, c.b.radius);
    c.result["break_accumulation"] = {{"tail_clusters", clusters_json(acc.tail_clusters)},
                                      {"inclusion_verified", acc.inclusion_verified}};
  }
  if (c.series) {
    c.out.series("delta_sum.csv", ds.mean_partial_sums);
    c.out.series("extreme_pair_log_distance.csv", pair.log_distance);
  }
  return {exit_ok,
          "SIMULATED (residual " + fmt(res.average) + ", entropy " + fmt(ent.h_estimate) + ", " +
              std::to_string(dich.synchronized + dich.separated) + "/" + std::to_string(c.b.runs) +
              " pairs decided, single backward cluster in " + std::to_string(single) + "/" +
              std::to_string(bc.counts.size()) + " runs)",
          {}};
}

RunResult certify_free(Ctx& c) {
  const WalkModel model = build_model(c.s).with_seed(c.seed);
  Budgets budgets{c.b.max_len, c.b.runs, c.b.d_max, c.b.n, c.b.p_cap};
  auto fr = assemble_free_pair(model, c.b.eps, budgets);
  c.result["stage"] = fr.stage;
  c.result["diagnostics"] = fr.diagnostics;
  c.result["finite_orbit"] = fr.finite_orbit;
  c.result["eps"] = rational_json(fr.eps);
  if (!fr.cert) {
    c.status = "undecided";
    return {exit_undecided,
            "UNDECIDED within budget (stopped at the " + fr.stage + " stage" +
                (fr.finite_orbit ? "; finite orbit detected)" : ")"),
            {}};
  }
  auto sanity = free_group_sanity(fr.cert->a1, fr.cert->a2, 8);
  c.result["a1"] = fr.cert->a1.label();
  c.result["a2"] = fr.cert->a2.label();
  c.result["sanity"] = {{"L", 8}, {"ok", sanity.ok}, {"words_checked", sanity.words_checked}};
  c.out.json("ping_pong.json", certificate_json(*fr.cert));
  auto v = recheck(c.out.files.back());
  c.result["verified"] = v.ok;
  if (!v.ok || !sanity.ok) throw std::logic_error("emitted ping-pong certificate failed re-verification");
  c.status = "certified";
  return {exit_ok, "FREE (ping-pong verified)", {}};
}

RunResult find_measure(Ctx& c) {
  const WalkModel model = build_model(c.s).with_seed(c.seed);
  const auto& gens = model.maps();
  const int depth = c.b.depth;
  auto ms = solve_invariant_measure(gens, depth, std::max(depth, c.b.d_max));
  c.result["depth"] = depth;
  c.result["support"] = ms.support;
  c.status = "certified";
  if (!ms.cert) {
    c.result["feasible"] = false;
    c.out.json("measure_infeasibility.json", infeasibility_json(gens, depth, ms.farkas));
    if (!recheck(c.out.files.back()).ok) throw std::logic_error("emitted Farkas certificate failed re-verification");
    return {exit_ok, "NO INVARIANT MEASURE at depth " + std::to_string(depth) + " (Farkas certificate)", {}};
  }
  c.result["feasible"] = true;
  c.result["measure"] = measure_json(ms.cert->masses);
  c.result["consistency_depth"] = ms.cert->consistency_depth;
  c.out.json("invariant_measure.json", certificate_json(gens, *ms.cert));
  if (!recheck(c.out.files.back()).ok) throw std::logic_error("emitted measure certificate failed re-verification");

  std::string orbit_note;
  const auto& k = *model.space();
  if (auto fo = find_finite_orbit(gens, cell_endpoints(k, 1), 64)) {
    c.result["finite_orbit"] = points_json(fo->orbit);
    c.out.json("finite_orbit.json", certificate_json(gens, *fo));
    orbit_note = "; finite orbit of size " + std::to_string(fo->orbit.size());
  } else {
    c.result["finite_orbit"] = nullptr;
  }
  const auto& m = *ms.cert->masses.exact;
  std::string masses;
  if (m.size() <= 4) {
    for (std::size_t i = 0; i < m.size(); ++i) masses += (i ? ", " : "") + to_string(m[i]);
  } else {
    masses = std::to_string(m.size()) + " cells";
  }
  return {exit_ok,
          "INVARIANT MEASURE (depth " + std::to_string(depth) + ": " + masses + "; consistent to depth " +
              std::to_string(ms.cert->consistency_depth) + orbit_note + ")",
          {}};
}

RunResult morse_smale(Ctx& c) {
  const WalkModel model = build_model(c.s).with_seed(c.seed);
  std::optional<MorseSmaleCertificate> cert;
  if (c.s.budgets.word) {
    if (!c.s.region_A) throw SchemaError("/regions", "a fixed word needs regions A and B");
    auto g = word_element(model, *c.s.budgets.word);
    auto r = check_morse_smale(g, Region(model.space(), *c.s.region_A), Region(model.space(), *c.s.region_B));
    c.result["word"] = g.label();
    if (!r.cert) {
      c.result["reason"] = r.reason;
      c.status = "refuted";
      return {exit_ok, "NOT MORSE-SMALE (" + r.reason + ")", {}};
    }
    cert = r.cert;
  } else {
    if (!model.symmetric()) throw SchemaError("/generators", "the Morse-Smale search needs a symmetric model");
    cert = find_morse_smale(model, c.b.eps, c.b.n, c.b.runs);
  }
  if (!cert) {
    c.status = "undecided";
    return {exit_undecided, "UNDECIDED within budget (no Morse-Smale word found)", {}};
  }
  c.result["word"] = cert->g.label();
  c.result["periodic"] = periodic_json(cert->periodic);
  c.out.json("morse_smale.json", certificate_json(*cert));
  if (!recheck(c.out.files.back()).ok) throw std::logic_error("emitted Morse-Smale certificate failed re-verification");
  c.status = "certified";
  std::string word;
  for (const auto& w : cert->g.label()) word += (word.empty() ? "" : " ") + w;
  return {exit_ok,
          "MORSE-SMALE (g = " + word + ", " + std::to_string(cert->periodic.size()) + " hyperbolic periodic points)",
          {}};
}

RunResult giet_blowup(Ctx& c) {
  auto gens = build_giets(c.s);
  auto bu = blow_up(gens, c.b.L, c.b.rho);
  Json blown = Json::array();
  for (const auto& p : bu.blown) blown.push_back({{"c", rational_json(p.c)}, {"alpha", rational_json(p.alpha)}});
  Json d = Json::array(), defects = Json::array();
  for (const auto& x : bu.discontinuities) d.push_back(rational_json(x));
  for (const auto& x : bu.defects) defects.push_back(rational_json(x));
  c.result["L"] = c.b.L;
  c.result["rho"] = rational_json(c.b.rho);
  c.result["discontinuities"] = d;
  c.result["defects"] = defects;
  c.result["blown"] = blown;
  c.result["exact"] = bu.exact;
  if (!bu.exact) {
    c.status = "undecided";
    return {exit_undecided,
            "UNDECIDED within budget (discontinuity closure not reached at L = " + std::to_string(c.b.L) + ")", {}};
  }
  c.result["space"] = space_json(*bu.space);

  Scenario ex;
  ex.kind = ScenarioKind::simulate;
  ex.space = bu.space;
  ex.seed = c.seed;
  ex.probabilities = c.s.probabilities;
  for (std::size_t i = 0; i < bu.induced.size(); ++i) {
    GeneratorSpec g;
    g.name = c.s.generators[i].name;
    g.branches = bu.induced[i].branches();
    ex.generators.push_back(std::move(g));
  }
  c.out.json("blowup_scenario.json", scenario_json(ex));

  std::string note;
  if (auto fo = find_finite_orbit(bu.induced, {bu.space->min()}, 64)) {
    c.out.json("finite_orbit.json", certificate_json(bu.induced, *fo));
    c.result["finite_orbit"] = points_json(fo->orbit);
    note = "; finite orbit of size " + std::to_string(fo->orbit.size());
  }
  c.status = "certified";
  return {exit_ok, "BLOWN UP (|D| = " + std::to_string(bu.discontinuities.size()) + ", exact" + note + ")", {}};
}

}  // namespace

RunResult verify_file(const fs::path& certificate) {
  try {
    auto chk = verify_certificate(parse_json(read_file(certificate)));
    if (chk.verdict.ok) return {exit_ok, "VALID " + chk.kind + " certificate", {}};
    return {exit_input, "INVALID " + chk.kind + " certificate: " + chk.verdict.reason, {}};
  } catch (const std::exception& e) {
    return {exit_input, std::string("INVALID certificate: ") + e.what(), {}};
  }
}

RunResult run_scenario(const Scenario& s, const RunOptions& opt) {
  const ScenarioKind kind = opt.command.value_or(s.kind);
  try {
    if (kind == ScenarioKind::verify) {
      if (!s.certificate) throw SchemaError("/certificate", "no certificate named");
      return verify_file(*s.certificate);
    }
    Ctx c{s, resolve(s.budgets, budget_profile(opt.profile)), opt.seed.value_or(s.seed), {}, false};
    if (opt.runs) c.b.runs = *opt.runs;
    if (opt.depth) c.b.depth = *opt.depth;
    c.series = opt.emit_series || s.emit_series;
    c.out.dir = opt.out_dir ? *opt.out_dir : fs::path(s.out_dir.empty() ? "kdyn-out" : s.out_dir);
    fs::create_directories(c.out.dir);

    RunResult r;
    switch (kind) {
      case ScenarioKind::simulate: r = simulate(c); break;
      case ScenarioKind::certify_free: r = certify_free(c); break;
      case ScenarioKind::find_measure: r = find_measure(c); break;
      case ScenarioKind::morse_smale: r = morse_smale(c); break;
      case ScenarioKind::giet_blowup: r = giet_blowup(c); break;
      case ScenarioKind::verify: break;
    }
    Json gens = Json::array();
    for (const auto& g : s.generators) gens.push_back(g.name);
    Json report = {{"kind", to_string(kind) + "-report"},
                   {"seed", c.seed},
                   {"budgets", budget_json(c.b)},
                   {"generators", gens},
                   {"status", c.status},
                   {"verdict", r.verdict},
                   {"exit_code", r.exit_code},
                   {"result", c.result},
                   {"artifacts", c.out.names()}};
    c.out.json("report.json", report);
    c.out.json("meta.json", {{"timestamp", utc_now()},
                              {"command", to_string(kind)},
                              {"profile", opt.profile},
                              {"scenario_kind", to_string(s.kind)}});
    r.artifacts = c.out.files;
    return r;
  } catch (const SchemaError& e) {
    return {exit_input, std::string("INPUT ERROR: ") + e.what(), {}};
  } catch (const std::invalid_argument& e) {
    return {exit_input, std::string("INPUT ERROR: ") + e.what(), {}};
  } catch (const fs::filesystem_error& e) {
    return {exit_input, std::string("I/O ERROR: ") + e.what(), {}};
  }
}

}  // namespace kdyn
