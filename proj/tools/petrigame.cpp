// Command-line front end: soundness checks, game export, alignment
// analysis, Monte Carlo estimates, and the soundness/alignment bridge.
//
// Exit codes: 0 positive verdict, 1 negative verdict, 2 inconclusive,
// 3 input error, 64 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "petrigame/annotations.hpp"
#include "petrigame/corpus.hpp"
#include "petrigame/equilibrium.hpp"
#include "petrigame/fixtures.hpp"
#include "petrigame/pnml.hpp"
#include "petrigame/profile_io.hpp"
#include "petrigame/report.hpp"

namespace pg = petrigame;
using nlohmann::ordered_json;

namespace {

constexpr int kExitPositive = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitInputError = 3;
constexpr int kExitUsage = 64;

struct CommonOptions {
  std::string format = "json";
  std::string output;
  std::size_t bound = pg::kDefaultStateBound;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pg::ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const ordered_json& report, const CommonOptions& options) {
  const std::string text = pg::emit_report(report, options.format);
  if (options.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(options.output, std::ios::binary);
    if (!out) throw pg::Error("cannot write '" + options.output + "'");
    out << text;
  }
}

ordered_json input_block(const std::string& path, const std::string& bytes) {
  return ordered_json{{"path", path}, {"digest", pg::fnv1a64(bytes)}};
}

struct LoadedNet {
  pg::PnmlDocument pnml;
  ordered_json inputs;
};

LoadedNet load_net(const std::string& path) {
  const std::string bytes = read_file(path);
  LoadedNet loaded{pg::parse_pnml(bytes), ordered_json::object()};
  ordered_json net_info = input_block(path, bytes);
  net_info["places"] = loaded.pnml.net.place_count();
  net_info["transitions"] = loaded.pnml.net.transition_count();
  loaded.inputs["net"] = std::move(net_info);
  return loaded;
}

pg::AnnotationResult load_annotations(const std::string& path, const pg::PnmlDocument& pnml,
                                      ordered_json& inputs) {
  const std::string bytes = read_file(path);
  pg::AnnotationResult result = pg::parse_annotations(bytes, pnml.net, pnml.initial);
  ordered_json info = input_block(path, bytes);
  info["roles"] = result.net.roles();
  inputs["annotations"] = std::move(info);
  return result;
}

ordered_json structural_block(const pg::AnnotatedNet& a) {
  const pg::StructuralReport r = pg::structural_checks(a);
  ordered_json out;
  out["extended_free_choice"] = r.extended_free_choice;
  if (r.workflow) {
    out["workflow"] = ordered_json{{"initial", a.net().place_id(r.workflow->initial_place)},
                                   {"final", a.net().place_id(r.workflow->final_place)}};
  } else {
    out["workflow"] = nullptr;
  }
  return out;
}

ordered_json payoff_block(const pg::StochasticGame& game, const pg::RatVec& value) {
  ordered_json out = ordered_json::object();
  for (int player = 0; player < game.player_count(); ++player)
    out[game.player_name(player)] = pg::json_rational(value[player]);
  return out;
}

int run_check_soundness(const std::string& net_path, const CommonOptions& options) {
  const LoadedNet loaded = load_net(net_path);
  const pg::AnnotatedNet bare(loaded.pnml.net, loaded.pnml.initial, {}, {}, {});
  ordered_json report = pg::report_header(0);
  report["inputs"] = loaded.inputs;
  report["structural"] = structural_block(bare);
  const pg::StructuralReport structure = pg::structural_checks(bare);
  if (!structure.workflow)
    throw pg::NotAWorkflowNet("net lacks the elementary workflow-net shape");
  const pg::SoundnessReport soundness =
      pg::check_soundness(bare, *structure.workflow, options.bound);
  report["soundness"] = pg::json_soundness(loaded.pnml.net, soundness);
  write_output(report, options);
  return soundness.sound ? kExitPositive : kExitNegative;
}

int run_build_game(const std::string& net_path, const std::string& ann_path, bool restart,
                   const CommonOptions& options) {
  LoadedNet loaded = load_net(net_path);
  ordered_json inputs = loaded.inputs;
  const pg::AnnotationResult ann = load_annotations(ann_path, loaded.pnml, inputs);
  const pg::fixtures::GamePair games = pg::fixtures::build_games(ann.net, options.bound);
  const pg::StochasticGame& game = restart ? games.restart : games.base;
  ordered_json report = pg::export_game_json(game);
  report["inputs"] = inputs;
  if (ann.has_probability_annotations)
    report["notes"] = ordered_json::array(
        {"transition_probabilities annotation present: reserved, no semantics attached"});
  write_output(report, options);
  return kExitPositive;
}

pg::AlignmentMode parse_mode(const std::string& mode) {
  if (mode == "proper-completion") return pg::AlignmentMode::proper_completion;
  if (mode == "full-liveness") return pg::AlignmentMode::full_liveness;
  throw pg::Error("unknown mode '" + mode + "'");
}

ordered_json verdict_block(const pg::StochasticGame& game, const pg::AlignmentVerdict& verdict) {
  ordered_json out;
  out["mode"] = pg::to_string(verdict.mode);
  out["verdict"] =
      verdict.inconclusive ? "inconclusive" : (verdict.aligned ? "aligned" : "not-aligned");
  out["epsilon"] = pg::json_rational(verdict.epsilon);
  out["gains"] = pg::json_gains(game, verdict.gains);
  ordered_json longrun = ordered_json::object();
  for (int r = 0; r < game.nature_player(); ++r)
    longrun[game.player_name(r)] = pg::json_rational(verdict.longrun[r]);
  out["longrun_payoffs"] = std::move(longrun);
  out["failures"] = verdict.failures;
  return out;
}

int run_analyze(const std::string& net_path, const std::string& ann_path,
                const std::string& mode_name, const std::string& epsilon_text,
                const std::string& profile_path, const std::string& device_path, int effort,
                int stages, int trials, std::uint64_t seed, const CommonOptions& options) {
  LoadedNet loaded = load_net(net_path);
  ordered_json inputs = loaded.inputs;
  const pg::AnnotationResult ann = load_annotations(ann_path, loaded.pnml, inputs);
  const pg::AlignmentMode mode = parse_mode(mode_name);
  const pg::Rational epsilon = pg::parse_rational(epsilon_text);

  const pg::fixtures::GamePair games = pg::fixtures::build_games(ann.net, options.bound);
  const pg::StochasticGame& game = games.restart;

  ordered_json report = pg::report_header(seed);
  report["inputs"] = inputs;
  report["structural"] = structural_block(ann.net);
  const pg::StructuralReport structure = pg::structural_checks(ann.net);
  if (structure.workflow)
    report["soundness"] = pg::json_soundness(
        loaded.pnml.net, pg::check_soundness(ann.net, *structure.workflow, options.bound));
  report["game"] = ordered_json{{"variant", "restart"},
                                {"states", game.state_count()},
                                {"players", game.player_count()}};
  std::vector<std::string> notes;
  if (ann.has_probability_annotations)
    notes.push_back("transition_probabilities annotation present: reserved, no semantics attached");
  if (!device_path.empty() && profile_path.empty())
    notes.push_back("witness search explores the trivial device only; supplied device ignored");

  pg::CorrelationDevice device = pg::trivial_device(game.player_count());
  if (!device_path.empty()) {
    const std::string bytes = read_file(device_path);
    inputs["device"] = input_block(device_path, bytes);
    report["inputs"] = inputs;
    device = pg::device_from_json(nlohmann::json::parse(bytes), game);
  }

  int exit_code = kExitInconclusive;
  if (!profile_path.empty()) {
    const std::string bytes = read_file(profile_path);
    inputs["profile"] = input_block(profile_path, bytes);
    report["inputs"] = inputs;
    const pg::StrategyProfile profile =
        pg::profile_from_json(nlohmann::json::parse(bytes), game, device);
    const bool exact_device = device.is_trivial() || device.is_public_broadcast();
    if (exact_device) {
      const pg::AlignmentVerdict verdict =
          pg::check_alignment_witness(game, device, profile, mode, epsilon);
      report["profile"] = ordered_json{{"source", "supplied"}};
      report["payoffs"] =
          payoff_block(game, pg::longrun_average_payoff(game, device, profile));
      report["alignment"] = verdict_block(game, verdict);
      exit_code = verdict.aligned ? kExitPositive : kExitNegative;
    } else {
      // Private signals: exact best response is out of reach; estimate
      // deviation gains from a finite library and say so.
      notes.push_back("private-signal device: deviation gains are heuristic lower bounds");
      ordered_json gains = ordered_json::array();
      bool refuted = false;
      for (int player = 0; player < game.nature_player(); ++player) {
        const auto library = pg::default_deviation_library(game, device, player);
        const pg::EstimatedGain est = pg::estimate_deviation_gain(
            game, device, profile, player, library, stages, trials, seed);
        gains.push_back(ordered_json{{"player", game.player_name(player)},
                                     {"gain_estimate", est.value},
                                     {"std_error", est.std_error},
                                     {"best_deviation", est.best_deviation},
                                     {"heuristic", true}});
        if (est.value > pg::to_double(epsilon)) refuted = true;
      }
      const pg::PositivityCheck positivity = pg::eventually_positive(game, device, profile);
      report["profile"] = ordered_json{{"source", "supplied"}};
      report["payoffs"] =
          payoff_block(game, pg::longrun_average_payoff(game, device, profile));
      ordered_json alignment;
      alignment["mode"] = pg::to_string(mode);
      alignment["gains"] = std::move(gains);
      alignment["eventually_positive"] = positivity.eventually_positive;
      alignment["verdict"] = refuted || !positivity.eventually_positive ? "not-aligned"
                                                                        : "inconclusive";
      report["alignment"] = std::move(alignment);
      exit_code = refuted || !positivity.eventually_positive ? kExitNegative : kExitInconclusive;
    }
  } else {
    const pg::SearchResult search = pg::search_alignment(game, mode, epsilon, effort);
    report["profile"] = ordered_json{{"source", "searched"}, {"rounds", search.rounds}};
    report["alignment"] = verdict_block(game, search.verdict);
    if (search.found) {
      const pg::CorrelationDevice trivial = pg::trivial_device(game.player_count());
      report["payoffs"] =
          payoff_block(game, pg::longrun_average_payoff(game, trivial, *search.witness));
      report["witness"] =
          ordered_json{{"device", pg::device_to_json(trivial, game)},
                       {"profile", pg::profile_to_json(*search.witness, game, trivial)}};
      exit_code = kExitPositive;
    } else {
      notes.push_back("search exhausted its effort; absence of a witness is not certified");
      exit_code = kExitInconclusive;
    }
  }
  if (!notes.empty()) report["notes"] = notes;
  write_output(report, options);
  return exit_code;
}

int run_simulate(const std::string& net_path, const std::string& ann_path, bool base_variant,
                 const std::string& profile_path, const std::string& device_path, int stages,
                 int trials, std::uint64_t seed, const CommonOptions& options) {
  LoadedNet loaded = load_net(net_path);
  ordered_json inputs = loaded.inputs;
  const pg::AnnotationResult ann = load_annotations(ann_path, loaded.pnml, inputs);
  const pg::fixtures::GamePair games = pg::fixtures::build_games(ann.net, options.bound);
  const pg::StochasticGame& game = base_variant ? games.base : games.restart;

  pg::CorrelationDevice device = pg::trivial_device(game.player_count());
  if (!device_path.empty()) {
    const std::string bytes = read_file(device_path);
    inputs["device"] = input_block(device_path, bytes);
    device = pg::device_from_json(nlohmann::json::parse(bytes), game);
  }
  pg::StrategyProfile profile = pg::StrategyProfile::all_act(game, device);
  if (!profile_path.empty()) {
    const std::string bytes = read_file(profile_path);
    inputs["profile"] = input_block(profile_path, bytes);
    profile = pg::profile_from_json(nlohmann::json::parse(bytes), game, device);
  }

  const pg::SimulationResult result =
      pg::simulate(game, device, game.initial_state(), profile, stages, trials, seed);
  ordered_json report = pg::report_header(seed);
  report["inputs"] = inputs;
  report["game"] = ordered_json{{"variant", base_variant ? "base" : "restart"},
                                {"states", game.state_count()}};
  report["simulation"] = ordered_json{{"stages", result.stages}, {"trials", result.trials}};
  ordered_json estimates = ordered_json::object();
  for (int player = 0; player < game.player_count(); ++player)
    estimates[game.player_name(player)] = ordered_json{{"mean", result.mean[player]},
                                                       {"std_error", result.std_error[player]}};
  report["estimates"] = std::move(estimates);
  write_output(report, options);
  return kExitPositive;
}

int run_bridge(const std::string& net_path, const CommonOptions& options) {
  const LoadedNet loaded = load_net(net_path);
  const pg::AnnotatedNet unit = pg::unit_annotation(loaded.pnml.net, loaded.pnml.initial);
  const pg::BridgeReport bridge = pg::soundness_alignment_bridge(unit, options.bound);
  ordered_json report = pg::report_header(0);
  report["inputs"] = loaded.inputs;
  report["soundness"] = pg::json_soundness(loaded.pnml.net, bridge.soundness);
  ordered_json alignment = ordered_json{{"aligned_full_liveness", bridge.aligned_full_liveness}};
  alignment["failures"] = bridge.alignment.failures;
  report["alignment"] = std::move(alignment);
  report["bridge"] = ordered_json{{"sound", bridge.sound},
                                  {"aligned_full_liveness", bridge.aligned_full_liveness},
                                  {"agree", bridge.agree}};
  write_output(report, options);
  if (!bridge.agree) return kExitNegative;
  return kExitPositive;
}

std::size_t env_bound_default() {
  if (const char* value = std::getenv("PETRIGAME_BOUND")) return std::strtoull(value, nullptr, 10);
  return pg::kDefaultStateBound;
}

int env_effort_default() {
  if (const char* value = std::getenv("PETRIGAME_EFFORT")) return std::atoi(value);
  return 8;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-game analysis of Petri nets with utility annotations"};
  app.require_subcommand(1);

  CommonOptions common;
  common.bound = env_bound_default();
  std::string net_path, ann_path, mode_name = "proper-completion";
  std::string profile_path, device_path, epsilon_text = "1/1000000";
  bool restart = false, base_variant = false;
  int effort = env_effort_default();
  int stages = 1000, trials = 10000;
  std::uint64_t seed = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--format", common.format, "Report format: json or text")
        ->check(CLI::IsMember({"json", "text"}));
    cmd->add_option("-o,--output", common.output, "Write the report to a file");
    cmd->add_option("--bound", common.bound, "State-count limit for exploration");
  };

  CLI::App* check = app.add_subcommand("check-soundness", "Classical workflow-net soundness");
  check->add_option("net", net_path, "PNML file")->required();
  add_common(check);

  CLI::App* build = app.add_subcommand("build-game", "Export the stochastic game as JSON");
  build->add_option("net", net_path, "PNML file")->required();
  build->add_option("annotations", ann_path, "Annotation JSON")->required();
  build->add_flag("--restart", restart, "Export the restart game instead of the base game");
  add_common(build);

  CLI::App* analyze = app.add_subcommand("analyze", "Equilibrium and incentive-alignment verdicts");
  analyze->add_option("net", net_path, "PNML file")->required();
  analyze->add_option("annotations", ann_path, "Annotation JSON")->required();
  analyze->add_option("--mode", mode_name, "proper-completion or full-liveness")
      ->check(CLI::IsMember({"proper-completion", "full-liveness"}));
  analyze->add_option("--epsilon", epsilon_text, "Equilibrium tolerance (rational)");
  analyze->add_option("--profile", profile_path, "Witness profile JSON (searched when absent)");
  analyze->add_option("--device", device_path, "Correlation device JSON (trivial when absent)");
  analyze->add_option("--effort", effort, "Best-response search rounds");
  analyze->add_option("--stages", stages, "Stages per heuristic simulation");
  analyze->add_option("--trials", trials, "Trials per heuristic simulation");
  analyze->add_option("--seed", seed, "Simulation seed");
  add_common(analyze);

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo payoff estimates");
  sim->add_option("net", net_path, "PNML file")->required();
  sim->add_option("annotations", ann_path, "Annotation JSON")->required();
  sim->add_flag("--base", base_variant, "Simulate the base game (default: restart game)");
  sim->add_option("--profile", profile_path, "Profile JSON (default: uniform always-act)");
  sim->add_option("--device", device_path, "Correlation device JSON");
  sim->add_option("--stages", stages, "Stages per trial");
  sim->add_option("--trials", trials, "Number of trials");
  sim->add_option("--seed", seed, "Base seed (per-trial seeds are derived)");
  add_common(sim);

  CLI::App* bridge = app.add_subcommand(
      "bridge", "Soundness vs full-liveness alignment on the unit-utility single-role reading");
  bridge->add_option("net", net_path, "PNML file")->required();
  add_common(bridge);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (check->parsed()) return run_check_soundness(net_path, common);
    if (build->parsed()) return run_build_game(net_path, ann_path, restart, common);
    if (analyze->parsed())
      return run_analyze(net_path, ann_path, mode_name, epsilon_text, profile_path, device_path,
                         effort, stages, trials, seed, common);
    if (sim->parsed())
      return run_simulate(net_path, ann_path, base_variant, profile_path, device_path, stages,
                          trials, seed, common);
    if (bridge->parsed()) return run_bridge(net_path, common);
  } catch (const pg::StateSpaceExceeded& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const pg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitUsage;
}
