// Command-line front end: fitting, path inspection, condition checks,
// simulation, and Monte Carlo sweeps over blocky signals.
//
// Exit codes: 0 success, 1 usage error, 2 data/computation error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flsa/design_transform.hpp"
#include "flsa/errors.hpp"
#include "flsa/experiments.hpp"
#include "flsa/flsa_solver.hpp"
#include "flsa/ic.hpp"
#include "flsa/io.hpp"
#include "flsa/puffer.hpp"
#include "flsa/random.hpp"
#include "flsa/signal_model.hpp"

namespace {

// Writes to a file, or to stdout for "-".
class OutputTarget {
public:
  explicit OutputTarget(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) {
        throw flsa::InvalidInput("cannot open '" + path + "' for writing");
      }
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

std::vector<double> parse_sigma_list(const std::string& text) {
  std::vector<double> sigmas;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
      sigmas.push_back(v);
    } catch (const std::exception&) {
      throw flsa::InvalidParameter("bad sigma value '" + item + "'");
    }
  }
  if (sigmas.empty()) {
    throw flsa::InvalidParameter("empty sigma list");
  }
  return sigmas;
}

flsa::StepwiseSignal load_signal(const std::string& blocks_path) {
  return flsa::make_stepwise(flsa::read_blocks_file(blocks_path));
}

struct CommonArgs {
  std::string input;
  std::string blocks;
  std::string output = "-";
};

int run(int argc, char** argv) {
  CLI::App app{"Blocky-signal pattern recovery: fused penalties, "
               "preconditioned thresholding, and support diagnostics"};
  app.require_subcommand(1);

  // --- fit ---------------------------------------------------------
  auto args = std::make_shared<CommonArgs>();
  double lambda1 = 0.0, lambda2 = 0.0, lambda = 0.0, sigma = 0.0;
  std::uint64_t seed = 0, replicate = 0;
  std::string path_method = "flsa";
  std::string sweep_method = "preconditioned";
  std::string breakpoints_out, json_out, sigma_list;
  std::size_t replicates = 300, n_arg = 0;
  unsigned threads = 0;
  bool lasso_bound = false, check_jumps = false;
  double noise_eigenmax = 0.0, strength = 0.0;

  CLI::App* fit = app.add_subcommand("fit", "Fused-penalty fit of a sequence");
  fit->add_option("-i,--input", args->input, "sequence CSV (index,value)")->required();
  fit->add_option("--lambda1", lambda1, "sparsity penalty")->default_val(0.0);
  fit->add_option("--lambda2", lambda2, "fusion penalty")->default_val(0.0);
  fit->add_option("-o,--output", args->output, "output CSV or - for stdout");

  CLI::App* precond = app.add_subcommand("precondition", "Thresholded fit of the preconditioned regression");
  precond->add_option("-i,--input", args->input, "sequence CSV (index,value)")->required();
  precond->add_option("--lambda", lambda, "threshold")->required();
  precond->add_option("-o,--output", args->output, "output CSV or - for stdout");
  precond->add_option("--breakpoints", breakpoints_out, "also write the path breakpoints CSV here");

  CLI::App* pathcmd = app.add_subcommand("path", "Solution-path structure of a sequence");
  pathcmd->add_option("-i,--input", args->input, "sequence CSV (index,value)")->required();
  pathcmd->add_option("--method", path_method, "flsa | preconditioned")
      ->check(CLI::IsMember({"flsa", "preconditioned"}));
  pathcmd->add_option("-o,--output", args->output, "output CSV or - for stdout");

  CLI::App* checkic = app.add_subcommand("check-ic", "Support recoverability report for a blocky signal");
  checkic->add_option("-b,--blocks", args->blocks, "blocks CSV (L,U,level)")->required();
  checkic->add_option("-o,--output", args->output, "output JSON or - for stdout");

  CLI::App* simulate = app.add_subcommand("simulate", "Draw one noisy copy of a blocky signal");
  simulate->add_option("-b,--blocks", args->blocks, "blocks CSV (L,U,level)")->required();
  simulate->add_option("--sigma", sigma, "noise level")->required();
  simulate->add_option("--seed", seed, "base seed")->default_val(0);
  simulate->add_option("--replicate", replicate, "replicate index within the seed")->default_val(0);
  simulate->add_option("-o,--output", args->output, "output CSV or - for stdout");

  CLI::App* sweep = app.add_subcommand("sweep", "Recovery probability across noise levels");
  sweep->add_option("-b,--blocks", args->blocks, "blocks CSV (L,U,level)")->required();
  sweep->add_option("--sigmas", sigma_list, "comma-separated noise levels")->required();
  sweep->add_option("--replicates", replicates, "replicates per noise level")->default_val(300);
  sweep->add_option("--seed", seed, "base seed")->default_val(0);
  sweep->add_option("--method", sweep_method, "flsa | preconditioned")
      ->check(CLI::IsMember({"flsa", "preconditioned"}));
  sweep->add_option("--threads", threads, "worker threads, 0 = auto")->default_val(0);
  sweep->add_option("-o,--output", args->output, "output CSV or - for stdout");
  sweep->add_option("--json", json_out, "also write the full result JSON here");

  CLI::App* bound = app.add_subcommand("bound", "Analytic recovery guarantees");
  bound->add_option("--lambda", lambda, "penalty")->required();
  bound->add_option("--sigma", sigma, "noise level")->required();
  bound->add_option("--n", n_arg, "signal length");
  bound->add_option("-b,--blocks", args->blocks, "blocks CSV supplying the signal");
  bound->add_flag("--check-jumps", check_jumps, "with --blocks: report the jump-size requirement");
  bound->add_flag("--lasso", lasso_bound, "with --blocks: general-design guarantee on the difference design");
  bound->add_option("--noise-eigenmax", noise_eigenmax,
                    "largest noise covariance eigenvalue for --lasso (default sigma^2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help is success, anything else is usage
  }

  if (fit->parsed()) {
    const auto y = flsa::read_sequence_file(args->input);
    const auto mu = flsa::fused_fit(y, lambda1, lambda2);
    OutputTarget out(args->output);
    flsa::write_sequence_csv(out.stream(), mu);
    return 0;
  }

  if (precond->parsed()) {
    const auto y = flsa::read_sequence_file(args->input);
    const auto result = flsa::preconditioned_fit(y, lambda);
    OutputTarget out(args->output);
    flsa::write_sequence_csv(out.stream(), result.fitted);
    if (!breakpoints_out.empty()) {
      OutputTarget bp(breakpoints_out);
      flsa::write_breakpoints_csv(bp.stream(), result.path.breakpoints);
    }
    return 0;
  }

  if (pathcmd->parsed()) {
    const auto y = flsa::read_sequence_file(args->input);
    OutputTarget out(args->output);
    if (flsa::method_from_name(path_method) == flsa::Method::flsa) {
      flsa::write_events_csv(out.stream(), flsa::flsa_path(y));
    } else {
      flsa::write_breakpoints_csv(out.stream(), flsa::threshold_path(y).breakpoints);
    }
    return 0;
  }

  if (checkic->parsed()) {
    const auto signal = load_signal(args->blocks);
    const auto report = flsa::ic_report(flsa::support_from_signal(signal));
    OutputTarget out(args->output);
    out.stream() << flsa::to_json(report).dump(2) << '\n';
    return 0;
  }

  if (simulate->parsed()) {
    const auto signal = load_signal(args->blocks);
    flsa::Rng rng(seed, {replicate});
    const auto draw = flsa::sample_noisy(signal, sigma, rng);
    OutputTarget out(args->output);
    flsa::write_sequence_csv(out.stream(), draw.values);
    return 0;
  }

  if (sweep->parsed()) {
    flsa::ExperimentConfig cfg;
    cfg.signal = load_signal(args->blocks);
    cfg.sigmas = parse_sigma_list(sigma_list);
    cfg.replicates = replicates;
    cfg.seed = seed;
    cfg.method = flsa::method_from_name(sweep_method);
    cfg.threads = threads;
    const auto result = flsa::recovery_probability(cfg);
    std::vector<flsa::SweepPoint> points(result.per_sigma.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      points[i] = {result.per_sigma[i].sigma, result.per_sigma[i].probability,
                   result.per_sigma[i].std_error};
    }
    OutputTarget out(args->output);
    flsa::write_sweep_csv(out.stream(), points);
    if (!json_out.empty()) {
      OutputTarget jout(json_out);
      nlohmann::json j;
      j["config"] = flsa::to_json(cfg);
      j["result"] = flsa::to_json(result);
      jout.stream() << j.dump(2) << '\n';
    }
    return 0;
  }

  if (bound->parsed()) {
    if ((n_arg == 0) == args->blocks.empty()) {
      std::cerr << "bound: provide exactly one of --n or --blocks\n";
      return 1;
    }
    char line[64];
    if (!args->blocks.empty()) {
      const auto signal = load_signal(args->blocks);
      const auto rb = flsa::recovery_lower_bound(lambda, sigma, signal);
      std::snprintf(line, sizeof(line), "%.4f", rb.probability);
      std::cout << line << '\n';
      if (check_jumps) {
        std::cout << "min_jump," << flsa::format_double(rb.min_jump) << '\n';
        std::cout << "jump_condition_met," << (rb.jump_condition_met ? 1 : 0) << '\n';
      }
      if (lasso_bound) {
        const auto jumps = flsa::support_from_signal(signal);
        const auto x = flsa::dense_centered_design(signal.size());
        const auto mu = signal.expected();
        std::vector<double> beta(signal.size() - 1, 0.0);
        for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
          beta[i] = mu[i + 1] - mu[i];
        }
        const double eigmax = noise_eigenmax > 0.0 ? noise_eigenmax : sigma * sigma;
        const auto lb = flsa::lasso_recovery_bound(x, beta, lambda, eigmax);
        std::cout << "psi," << flsa::format_double(lb.psi) << '\n';
        std::cout << "eta," << flsa::format_double(lb.eta) << '\n';
        std::cout << "condition_ok," << (lb.condition_ok ? 1 : 0) << '\n';
        std::cout << "probability," << flsa::format_double(lb.probability) << '\n';
      }
    } else {
      const double p = flsa::recovery_lower_bound(lambda, sigma, n_arg);
      std::snprintf(line, sizeof(line), "%.4f", p);
      std::cout << line << '\n';
    }
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const flsa::InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const flsa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
