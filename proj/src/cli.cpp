#include "camcover/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>

#include "camcover/checkpoint.hpp"
#include "camcover/eval.hpp"
#include "camcover/trainer.hpp"

namespace camcover {

using nlohmann::json;

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const TrainSummary summary = run_training(cfg, &out);
    out << "trained " << summary.episodes << " episodes ("
        << summary.env_steps << " steps), final epsilon "
        << summary.final_epsilon << "\n";
    if (!summary.final_checkpoint.empty())
      out << "final checkpoint: " << summary.final_checkpoint << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "train failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_eval(const std::string& checkpoint_path, bool baseline,
             const RunConfig& cfg, int n_runs, std::ostream& out,
             std::ostream& err) {
  try {
    cfg.validate();
    std::unique_ptr<Policy> policy;
    net::NetworkParams params;
    if (baseline) {
      policy = std::make_unique<FixedBaselinePolicy>(cfg.env.n_cameras);
    } else {
      if (checkpoint_path.empty())
        throw std::invalid_argument("need --checkpoint or --baseline");
      params = load_network_checked(checkpoint_path, make_topology(cfg));
      policy = std::make_unique<GreedyNetPolicy>(params);
    }

    EvalReport report = evaluate(*policy, cfg.env, cfg.noise, n_runs,
                                 split_seed(cfg.seed, 0x5EED));
    report.config_fingerprint = config_fingerprint(cfg);

    out << (baseline ? "fixed-camera baseline" : "greedy policy") << ", "
        << report.n_runs << " runs\n";
    out << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < report.per_run.size(); ++i)
      out << "  run " << i << ": coverage " << report.per_run[i] << "\n";
    out << "coverage " << report.mean << " +- " << report.stddev << "\n";
    out.unsetf(std::ios::fixed);

    if (!cfg.outdir.empty()) {
      std::filesystem::create_directories(cfg.outdir);
      json j;
      j["policy"] = baseline ? "baseline" : checkpoint_path;
      j["mean"] = report.mean;
      j["std"] = report.stddev;
      j["per_run"] = report.per_run;
      j["n_runs"] = report.n_runs;
      j["config_fingerprint"] = report.config_fingerprint;
      std::ofstream rf(std::filesystem::path(cfg.outdir) / "report");
      rf << j.dump(2) << "\n";
      if (!rf) throw std::runtime_error("cannot write report into " + cfg.outdir);
    }
    return 0;
  } catch (const TopologyMismatchError& e) {
    err << "eval failed: checkpoint topology does not match the config\n"
        << "  checkpoint: " << e.found.describe() << "\n"
        << "  config:     " << e.expected.describe() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "eval failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_gradcheck(std::uint64_t seed, int trials, bool inject_fault,
                  std::ostream& out, std::ostream& err) {
  try {
    if (trials == 0)
      err << "warning: 0 trials requested; nothing was checked\n";
    const auto report = net::gradient_check(seed, trials, 1e-4, inject_fault);
    out << "gradient check: " << report.trials << " trials, max relative error "
        << report.max_rel_error << "\n";
    out << (report.pass ? "PASS" : "FAIL") << "\n";
    return report.pass ? 0 : 1;
  } catch (const std::exception& e) {
    err << "gradcheck failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_ipt_bench(const RunConfig& cfg, int steps, std::ostream& out,
                  std::ostream& err) {
  try {
    cfg.validate();
    const IptReport r = ipt_benchmark(cfg.env, steps, cfg.noise, cfg.seed);
    out << "coordinate estimation over " << r.steps << " steps ("
        << r.n_estimates << " estimates from " << r.n_true_boxes
        << " boxes, match rate " << r.match_rate << ")\n";
    out << "  all:       mean " << r.mean << " +- " << r.stddev
        << " world units\n";
    out << "  unclipped: mean " << r.mean_unclipped << " +- "
        << r.stddev_unclipped << " (" << r.n_unclipped << ")\n";
    out << "  clipped:   mean " << r.mean_clipped << " +- " << r.stddev_clipped
        << " (" << r.n_clipped << ")\n";
    if (!cfg.noise.enabled && !(r.mean_unclipped < 50.0)) {
      err << "ipt-bench failed: unclipped mean error " << r.mean_unclipped
          << " exceeds 50 world units\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "ipt-bench failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace camcover
