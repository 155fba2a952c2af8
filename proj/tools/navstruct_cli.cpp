// Command-line front end: scenario generation, evaluation, landmark planning,
// greedy optimization, tradeoff sweeps, simulation and baselines.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "navstruct/navstruct.hpp"

namespace ns = navstruct;

namespace {

constexpr const char* kFormats = R"(File formats
  scenario   JSON {"n", "start", "neighbors": [[j...]...], "p_start": [[j, p]...],
             "p_switch": [[k, i, j, p]...], "lifetime": {"mu", "t_max"}}.
             Unknown top-level keys are rejected.
  sizes      CSV with header kind,i,j,bits. Rows I,<j>,,<bits> and M,<j>,,<bits>
             per MDU; P,<predictor>,<target>,<bits> per ordered pair.
  structure  JSON {"i_set": [...], "p_edges": [[i, j]...],
             "landmarks": [{"l": l, "members": [...]}...]} (landmarks optional).
  policy     JSON {"buffer": "fixed"|"flex", "entries": [{"t", "prev", "cur",
             "buffer", "target", "kind", "predictor", "via", "next_buffer", "bits"}]}
             with null for "none".
  tradeoff   CSV method,lambda,storage_bits,expected_bits,landmarks,p_edges.
  sweep      CSV lambda,storage_bits,expected_bits,landmarks,p_edges.
  log        one session per line, whitespace-separated viewport indices.

Exit codes: 0 success, 2 invalid input, 3 infeasible structure, 4 oracle refusal.
NAVSTRUCT_THREADS sets the worker count for the optimizer and simulator (default 1).)";

struct Inputs {
  std::string scenario, sizes;
};

struct Loaded {
  ns::Scenario scenario;
  ns::SizeTable sizes;
};

Loaded load_inputs(const Inputs& in) {
  Loaded out{ns::load_scenario(in.scenario), ns::load_sizes(in.sizes)};
  ns::require_complete(out.sizes, out.scenario.graph.size());
  return out;
}

void add_inputs(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--scenario", in.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--sizes", in.sizes, "Sizes CSV")->required()->check(CLI::ExistingFile);
}

void print_value(const std::string& name, double v) { std::cout << name << " " << ns::format_double(v) << "\n"; }

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else ns::write_text(path, text);
}

ns::RefinerParams refiner_from(double lambda, const std::string& buffer, bool no_prune) {
  ns::RefinerParams p;
  p.lambda = lambda;
  p.buffer = ns::parse_buffer_model(buffer);
  p.enable_pruning = !no_prune;
  return p;
}

std::string refine_log(const ns::RefineResult& r) {
  std::ostringstream os;
  os << "iteration,committed,edges,objective,expected_bits,storage_bits,candidates,screened,bound_checked,pruned,evaluated\n";
  for (const auto& s : r.passes) {
    std::string edges;
    for (const auto& e : s.edges) edges += (edges.empty() ? "" : " ") + std::to_string(e.predictor) + "->" + std::to_string(e.target);
    os << s.iteration << "," << s.committed << "," << edges << "," << ns::format_double(s.objective) << ","
       << ns::format_double(s.expected_cost) << "," << ns::format_double(s.storage) << "," << s.candidates << ","
       << s.screened << "," << s.bound_checked << "," << s.pruned << "," << s.evaluated << "\n";
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Redundant frame-structure optimization for interactive media navigation"};
  app.footer(kFormats);
  app.require_subcommand(1);

  // gen -------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a scenario and size table");
  gen->require_subcommand(1);
  std::string out_scenario, out_sizes;
  double p_unit = 1.0;
  double mu_override = 0.0;
  int t_max_override = 0;
  ns::LfGridSpec lf;
  auto* gen_lf = gen->add_subcommand("lf", "Light-field view-area grid");
  gen_lf->add_option("--rows", lf.rows, "View-area rows")->required();
  gen_lf->add_option("--cols", lf.cols, "View-area columns")->required();
  gen_lf->add_option("--sigma", lf.sigma, "Gaussian switch width")->capture_default_str();
  gen_lf->add_option("--quad-samples", lf.quad_samples, "Quadrature nodes per area edge")->capture_default_str();
  std::string log_path;
  int n_viewports = 30;
  auto* gen_vp = gen->add_subcommand("viewport", "360-degree viewports from a trajectory log");
  gen_vp->add_option("--log", log_path, "Trajectory log")->required()->check(CLI::ExistingFile);
  gen_vp->add_option("--n", n_viewports, "Number of viewports")->capture_default_str();

  for (auto* g : {gen_lf, gen_vp}) {
    g->add_option("--out-scenario", out_scenario, "Scenario JSON to write")->required();
    g->add_option("--out-sizes", out_sizes, "Sizes CSV to write")->required();
    g->add_option("--p-unit", p_unit, "Size of a P-MDU between adjacent MDUs")->capture_default_str();
    g->add_option("--mu", mu_override, "Override the expected lifetime");
    g->add_option("--t-max", t_max_override, "Override the maximum lifetime");
  }

  // eval ------------------------------------------------------------------
  Inputs in;
  std::string structure_path, buffer = "flex", policy_out;
  bool weight_first = false;
  auto* eval = app.add_subcommand("eval", "Expected transmission cost of a structure");
  add_inputs(eval, in);
  eval->add_option("--structure", structure_path, "Structure JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--buffer", buffer, "fixed, flex or inf")->capture_default_str();
  eval->add_flag("--weight-first-switch", weight_first, "Scale the first switch by g(1)");
  eval->add_option("--policy-out", policy_out, "Write the optimal policy JSON");

  // plan ------------------------------------------------------------------
  double lambda = 0.0;
  int max_lloyd = 100;
  std::string out_path;
  auto* plan = app.add_subcommand("plan", "Place landmarks and write the initial structure");
  add_inputs(plan, in);
  plan->add_option("--lambda", lambda, "Storage weight")->required()->check(CLI::NonNegativeNumber);
  plan->add_option("--max-lloyd", max_lloyd, "Lloyd iterations per split")->capture_default_str()->check(CLI::NonNegativeNumber);
  plan->add_option("--out", out_path, "Structure JSON to write")->required();

  // optimize --------------------------------------------------------------
  std::string init = "landmark", log_out;
  bool no_prune = false;
  auto* optimize = app.add_subcommand("optimize", "Greedy structure refinement");
  add_inputs(optimize, in);
  optimize->add_option("--lambda", lambda, "Storage weight")->required()->check(CLI::NonNegativeNumber);
  optimize->add_option("--init", init, "landmark or all-i")->capture_default_str()->check(CLI::IsMember({"landmark", "all-i"}));
  optimize->add_option("--buffer", buffer, "fixed or flex")->capture_default_str();
  optimize->add_option("--max-lloyd", max_lloyd, "Lloyd iterations per split")->capture_default_str();
  optimize->add_flag("--no-prune", no_prune, "Disable lower-bound pruning");
  optimize->add_option("--out", out_path, "Structure JSON to write")->required();
  optimize->add_option("--log", log_out, "Per-pass CSV log");

  // sweep -----------------------------------------------------------------
  std::string lambdas;
  auto* sweep = app.add_subcommand("sweep", "Landmark planning plus refinement over several lambdas");
  add_inputs(sweep, in);
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambdas")->required();
  sweep->add_option("--buffer", buffer, "fixed or flex")->capture_default_str();
  sweep->add_option("--max-lloyd", max_lloyd, "Lloyd iterations per split")->capture_default_str();
  sweep->add_flag("--no-prune", no_prune, "Disable lower-bound pruning");
  sweep->add_option("--out", out_path, "Sweep CSV (default stdout)");

  // simulate --------------------------------------------------------------
  std::string policy_path, traces_out;
  std::size_t sessions = 10000, keep_traces = 0;
  std::uint64_t seed = 1;
  bool consistency = false;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo sessions following a policy");
  add_inputs(simulate, in);
  simulate->add_option("--structure", structure_path, "Structure JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--policy", policy_path, "Policy JSON from eval --policy-out")->required()->check(CLI::ExistingFile);
  simulate->add_option("--sessions", sessions, "Number of sessions")->capture_default_str();
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_flag("--consistency-mode", consistency, "Draw lifetimes matching the evaluator's tail");
  simulate->add_flag("--weight-first-switch", weight_first, "Match eval --weight-first-switch");
  simulate->add_option("--traces", traces_out, "Write sampled traces as JSON lines");
  simulate->add_option("--keep-traces", keep_traces, "Number of traces to keep")->capture_default_str();

  // merge-demo ------------------------------------------------------------
  std::string merge_input;
  auto* merge = app.add_subcommand("merge-demo", "Merge parameters for rows target,v1,v2,...");
  merge->add_option("--input", merge_input, "CSV input (default stdin)");

  // baseline --------------------------------------------------------------
  std::string variant_names = "flex-ga", structure_out;
  auto* baseline = app.add_subcommand("baseline", "Comparison methods over several lambdas");
  add_inputs(baseline, in);
  baseline->add_option("--variant", variant_names, "Comma-separated: flex-ga, fixed-ga, flex-lm-i, inf-lm")->capture_default_str();
  baseline->add_option("--lambdas", lambdas, "Comma-separated lambdas")->required();
  baseline->add_option("--max-lloyd", max_lloyd, "Lloyd iterations per split")->capture_default_str();
  baseline->add_option("--out", out_path, "Tradeoff CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ns::ExitCode::invalid_input);
  }

  try {
    if (gen->parsed()) {
      ns::GeneratedScenario g;
      if (gen_lf->parsed()) {
        lf.p_unit = p_unit;
        g = ns::build_lf_scenario(lf);
      } else {
        std::ifstream log_in(log_path);
        g = ns::build_viewport_generated(ns::parse_trajectory_log(log_in), n_viewports, p_unit);
      }
      if (mu_override > 0.0 || t_max_override > 0)
        g.scenario.lifetime = ns::build_lifetime_tail(mu_override > 0.0 ? mu_override : g.scenario.lifetime.mu(),
                                                      t_max_override > 0 ? t_max_override : g.scenario.lifetime.t_max());
      for (const auto& w : g.warnings) std::cerr << "warning: " << w << "\n";
      ns::save_scenario(out_scenario, g.scenario);
      ns::save_sizes(out_sizes, g.sizes);
      std::cout << "mdus " << g.scenario.graph.size() << "\n";
    } else if (eval->parsed()) {
      auto [sc, sizes] = load_inputs(in);
      auto st = ns::load_structure(structure_path, sc.graph.size());
      ns::EvalOptions opts{weight_first, !policy_out.empty()};
      if (buffer == "inf") {
        if (!policy_out.empty()) throw ns::InvalidInput("--policy-out is not available for the unbounded buffer");
        print_value("expected_bits", ns::eval_unbounded(sc, sizes, st, opts));
      } else {
        auto r = ns::evaluate(sc, sizes, st, ns::parse_buffer_model(buffer), opts);
        print_value("expected_bits", r.expected_cost);
        print_value("storage_bits", ns::storage_cost(st, sizes));
        std::cout << "states " << r.stats.entries << "\n";
        if (!policy_out.empty()) ns::save_policy(policy_out, r.policy, r.buffer);
      }
    } else if (plan->parsed()) {
      auto [sc, sizes] = load_inputs(in);
      auto parts = ns::plan_landmarks(sc, sizes, lambda, max_lloyd);
      auto st = ns::build_initial_structure(parts, sizes);
      ns::save_structure(out_path, st);
      std::cout << "landmarks " << parts.size() << "\n";
      print_value("storage_bits", ns::storage_cost(st, sizes));
    } else if (optimize->parsed()) {
      auto [sc, sizes] = load_inputs(in);
      ns::Structure start = init == "all-i"
                                ? ns::all_intra_structure(sc.graph.size())
                                : ns::build_initial_structure(ns::plan_landmarks(sc, sizes, lambda, max_lloyd), sizes);
      auto r = ns::greedy_refine(sc, sizes, start, refiner_from(lambda, buffer, no_prune));
      ns::save_structure(out_path, r.structure);
      if (!log_out.empty()) ns::write_text(log_out, refine_log(r));
      print_value("objective", r.objective);
      print_value("expected_bits", r.expected_cost);
      print_value("storage_bits", r.storage);
      std::cout << "commits " << r.commits().size() << "\n";
      print_value("pruning_fraction", r.pruning_fraction());
    } else if (sweep->parsed()) {
      auto [sc, sizes] = load_inputs(in);
      ns::SweepParams sp;
      sp.refine = refiner_from(0.0, buffer, no_prune);
      sp.max_lloyd_iters = max_lloyd;
      std::vector<ns::TradeoffRow> rows;
      for (const auto& r : ns::sweep(sc, sizes, ns::parse_lambda_list(lambdas), sp))
        rows.push_back({"flex-lm", r.lambda, r.storage_bits, r.expected_bits, r.landmarks, r.p_edges});
      write_or_print(out_path, ns::sweep_to_csv(rows));
    } else if (simulate->parsed()) {
      auto [sc, sizes] = load_inputs(in);
      auto st = ns::load_structure(structure_path, sc.graph.size());
      auto pf = ns::load_policy(policy_path);
      ns::SimOptions so;
      so.sessions = sessions;
      so.seed = seed;
      so.sampling = consistency ? ns::LifetimeSampling::consistent : ns::LifetimeSampling::truncated_poisson;
      so.weight_first_switch = weight_first;
      so.keep_traces = traces_out.empty() ? 0 : std::max<std::size_t>(keep_traces, 1);
      auto r = ns::simulate_sessions(sc, sizes, st, pf.policy, pf.buffer, so);
      print_value("mean_bits", r.mean);
      print_value("std_error", r.std_error);
      std::cout << "sessions " << r.sessions << "\n";
      if (!traces_out.empty()) {
        std::string text;
        for (const auto& t : r.traces) text += ns::trace_to_json(t).dump() + "\n";
        ns::write_text(traces_out, text);
      }
    } else if (merge->parsed()) {
      std::ifstream file;
      if (!merge_input.empty()) {
        file.open(merge_input);
        if (!file) throw ns::InvalidInput("cannot open " + merge_input);
      }
      std::istream& src = merge_input.empty() ? std::cin : file;
      std::cout << "W,c,ok\n";
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(src, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::string where = "merge input line " + std::to_string(line_no);
        auto fields = ns::io_detail::split_csv(line);
        if (fields.size() < 2) throw ns::InvalidInput(where + ": need target and at least one value");
        const auto target = ns::parse_int(fields[0], where);
        std::vector<std::int64_t> values;
        for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(ns::parse_int(fields[k], where));
        const auto p = ns::select_merge_params(values, target);
        bool ok = ns::pwc_eval(p, target) == static_cast<double>(target);
        for (auto v : values) ok = ok && ns::pwc_eval(p, v) == static_cast<double>(target);
        std::cout << p.w_step << "," << ns::format_double(p.shift) << "," << (ok ? 1 : 0) << "\n";
      }
    } else if (baseline->parsed()) {
      auto [sc, sizes] = load_inputs(in);
      std::vector<ns::BaselineVariant> variants;
      for (auto v : ns::io_detail::split_csv(variant_names)) variants.push_back(ns::parse_baseline(std::string(v)));
      const auto lams = ns::parse_lambda_list(lambdas);
      std::vector<ns::TradeoffRow> rows;
      for (auto v : variants)
        for (double l : lams) {
          ns::BaselineParams bp;
          bp.lambda = l;
          bp.max_lloyd_iters = max_lloyd;
          auto r = ns::run_baseline(sc, sizes, bp, v);
          rows.push_back({ns::to_string(v), l, r.storage, r.expected_cost, r.landmarks, r.structure.edges.size()});
        }
      write_or_print(out_path, ns::tradeoff_to_csv(rows));
    }
  } catch (const ns::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ns::ExitCode::invalid_input);
  }
  return 0;
}
