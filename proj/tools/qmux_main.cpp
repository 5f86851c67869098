#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmux/cli.hpp"
#include "qmux/kv.hpp"

namespace {

using qmux::kv::Node;

// Registers per-subcommand flags and replays the ones the user actually set
// onto the sweep's parameter tree, so CLI flags override config-file values.
class ParamFlags {
 public:
  explicit ParamFlags(CLI::App* cmd) : cmd_(cmd) {}

  void number(const std::string& flag, const std::string& key, const std::string& desc) {
    auto holder = std::make_shared<double>(0.0);
    CLI::Option* opt = cmd_->add_option(flag, *holder, desc);
    apply_.push_back([holder, opt, key](Node& n) {
      if (opt->count() > 0) n.values[key] = qmux::kv::Scalar::number_of(*holder);
    });
  }

  void integer(const std::string& flag, const std::string& key, const std::string& desc) {
    auto holder = std::make_shared<long long>(0);
    CLI::Option* opt = cmd_->add_option(flag, *holder, desc);
    apply_.push_back([holder, opt, key](Node& n) {
      if (opt->count() > 0) {
        n.values[key] =
            qmux::kv::Scalar::integer_of(static_cast<std::uint64_t>(*holder < 0 ? 0 : *holder));
      }
    });
  }

  void text(const std::string& flag, const std::string& key, const std::string& desc) {
    auto holder = std::make_shared<std::string>();
    CLI::Option* opt = cmd_->add_option(flag, *holder, desc);
    apply_.push_back([holder, opt, key](Node& n) {
      if (opt->count() > 0) n.values[key] = qmux::kv::Scalar::text_of(*holder);
    });
  }

  void boolean(const std::string& flag, const std::string& key, const std::string& desc) {
    auto holder = std::make_shared<bool>(false);
    CLI::Option* opt = cmd_->add_flag(flag, *holder, desc);
    apply_.push_back([holder, opt, key](Node& n) {
      if (opt->count() > 0) n.values[key] = qmux::kv::Scalar::boolean_of(*holder);
    });
  }

  void list(const std::string& flag, const std::string& key, const std::string& desc) {
    auto holder = std::make_shared<std::vector<double>>();
    CLI::Option* opt = cmd_->add_option(flag, *holder, desc);
    apply_.push_back([holder, opt, key](Node& n) {
      if (opt->count() > 0) n.values[key] = qmux::kv::Scalar::list_of(*holder);
    });
  }

  void apply(Node& node) const {
    for (const auto& fn : apply_) fn(node);
  }

 private:
  CLI::App* cmd_;
  std::vector<std::function<void(Node&)>> apply_;
};

struct SubcommandState {
  CLI::App* cmd = nullptr;
  std::string target;  // empty for `run`
  std::string config_path;
  std::string out_path;
  unsigned long long seed = 0;
  CLI::Option* seed_opt = nullptr;
  int threads = 0;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  std::unique_ptr<ParamFlags> flags;
};

void add_shared(SubcommandState& st) {
  st.cmd->add_option("--config", st.config_path, "config file (kv text or a .meta.json sidecar)");
  st.out_opt = st.cmd->add_option("--out", st.out_path, "output CSV path");
  st.seed_opt = st.cmd->add_option("--seed", st.seed, "RNG seed (u64)");
  st.threads_opt =
      st.cmd->add_option("--threads", st.threads, "worker threads (0 = auto, env QMUX_THREADS)");
}

void add_ms_common(ParamFlags& f) {
  f.number("--eta-c", "eta_c", "client-server channel efficiency");
  f.number("--eta-s", "eta_s", "server-server channel efficiency");
  f.number("--tau-e", "tau_e", "attempt duration [s]");
  f.number("--tau-ce", "tau_ce", "coherence time during EG/RSP [s]");
  f.number("--tau-co", "tau_co", "idle coherence time [s]");
  f.integer("--ne", "n_e", "active-storage cutoff n_e");
  f.list("--alpha2-grid", "alpha2_grid", "WCP mean photon number grid");
  f.list("--no-grid", "n_o_grid", "idle cutoff n_o grid");
  f.text("--link", "link", "server link model: preset | single_click_eg");
  f.number("--pss", "p_ss", "preset server-server success probability");
  f.number("--f0-ss", "f0_ss", "preset server-server Bell fidelity");
  f.list("--xi2-grid", "xi2_grid", "bright-state grid for single_click_eg link");
  f.number("--alpha2-cap", "alpha2_cap", "cap on |alpha|^2");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmux - multiplexing models for quantum networks"};
  app.require_subcommand(1);

  std::vector<SubcommandState> subs(10);

  auto setup = [&](std::size_t i, const char* name, const char* target, const char* desc) {
    subs[i].cmd = app.add_subcommand(name, desc);
    subs[i].target = target;
    add_shared(subs[i]);
    subs[i].flags = std::make_unique<ParamFlags>(subs[i].cmd);
    return subs[i].flags.get();
  };

  {
    ParamFlags* f = setup(0, "window", "window", "window-problem expectations");
    f->integer("--w", "w", "window length in attempts");
    f->boolean("--infinite", "infinite", "infinite window");
    f->integer("--s", "s", "required successes");
    f->number("--p", "p", "per-attempt success probability");
    f->integer("--max-states", "max_states", "state-space limit for the exact solver");
  }
  {
    ParamFlags* f = setup(1, "limits", "limits", "semiclassical multiplexing limits");
    f->integer("--m", "m", "multiplexing resources used");
    f->integer("--s", "s", "qubits per protocol execution");
    f->integer("--mc", "m_c", "available channels M_c");
  }
  {
    ParamFlags* f = setup(2, "eg-curve", "eg_curve", "M-to-1 EG rate-fidelity curve");
    f->integer("--m", "m", "memories at node A");
    f->number("--eta", "eta", "symmetric channel efficiency");
    f->number("--eta-a", "eta_a", "channel efficiency on the A side");
    f->number("--eta-b", "eta_b", "channel efficiency on the B side");
    f->list("--xi-grid", "xi_grid", "explicit xi_A^2 grid");
    f->number("--xi-min", "xi_min", "grid start");
    f->number("--xi-max", "xi_max", "grid end");
    f->integer("--xi-points", "xi_points", "grid size");
    f->boolean("--xi-log", "xi_log", "log-spaced grid");
  }
  {
    ParamFlags* f = setup(3, "eg-gain", "eg_gain", "M-to-1 EG multiplexing gain vs M");
    f->integer("--m-max", "m_max", "largest M");
    f->number("--eta", "eta", "symmetric channel efficiency");
    f->number("--eta-a", "eta_a", "channel efficiency on the A side");
    f->number("--eta-b", "eta_b", "channel efficiency on the B side");
    f->number("--fmin", "f_min", "target fidelity");
  }
  {
    ParamFlags* f = setup(4, "rsp-curve", "rsp_curve", "M-client RSP rate-fidelity curve");
    f->integer("--m", "m", "client devices");
    f->number("--eta-c", "eta_c", "client channel efficiency");
    f->number("--eta-s", "eta_s", "server channel efficiency");
    f->text("--demand", "demand", "single_user | continuous | single_use");
    f->number("--alpha2-cap", "alpha2_cap", "cap on |alpha|^2");
    f->list("--gamma-grid", "gamma_grid", "explicit gamma grid");
    f->number("--gamma-min", "gamma_min", "grid start");
    f->number("--gamma-max", "gamma_max", "grid end");
    f->integer("--gamma-points", "gamma_points", "grid size");
    f->boolean("--gamma-log", "gamma_log", "log-spaced grid");
  }
  {
    ParamFlags* f = setup(5, "rsp-gain", "rsp_gain", "M-client RSP gain vs M");
    f->list("--m-list", "m_list", "explicit list of M values");
    f->integer("--m-max", "m_max", "1..m_max when no list is given");
    f->number("--eta-c", "eta_c", "client channel efficiency");
    f->number("--eta-s", "eta_s", "server channel efficiency");
    f->number("--fmin", "f_min", "target fidelity");
    f->text("--demand", "demand", "single_user | continuous | single_use");
    f->number("--alpha2-cap", "alpha2_cap", "cap on |alpha|^2");
  }
  {
    ParamFlags* f = setup(6, "ms-curve", "ms_curve", "multi-server rate vs F_min");
    f->integer("--m", "m", "servers");
    f->integer("--s", "s", "qubits");
    f->list("--fmin-list", "f_min_list", "target fidelity grid");
    f->integer("--n", "n", "Monte Carlo rounds per grid point");
    add_ms_common(*f);
  }
  {
    ParamFlags* f = setup(7, "ms-gain", "ms_gain", "multi-server gain vs M");
    f->integer("--s", "s", "qubits");
    f->list("--m-list", "m_list", "explicit list of M values");
    f->integer("--m-max", "m_max", "1..m_max when no list is given");
    f->number("--fmin", "f_min", "target fidelity");
    f->integer("--n", "n", "Monte Carlo rounds per grid point");
    add_ms_common(*f);
  }
  {
    ParamFlags* f = setup(8, "ms-sample", "ms_sample", "single multi-server sampler run");
    f->integer("--m", "m", "servers");
    f->integer("--s", "s", "qubits");
    f->number("--p-sc", "p_sc", "server-client success probability");
    f->number("--p-ss", "p_ss", "server-server success probability");
    f->integer("--ne", "n_e", "active cutoff n_e");
    f->integer("--no", "n_o", "idle cutoff n_o");
    f->number("--tau-e", "tau_e", "attempt duration [s]");
    f->number("--tau-ce", "tau_ce", "active coherence time [s]");
    f->number("--tau-co", "tau_co", "idle coherence time [s]");
    f->number("--f0-sc", "f0_sc", "intrinsic RSP fidelity");
    f->number("--f0-ss-intrinsic", "f0_ss_intrinsic", "intrinsic EG fidelity");
    f->integer("--n", "n", "rounds");
    f->number("--fmin", "f_min", "acceptance gate F_min");
    f->text("--strategy", "strategy", "multiplex | try_and_commit | baseline");
  }
  {
    SubcommandState& st = subs[9];
    st.cmd = app.add_subcommand("run", "re-run a sweep from a config or sidecar file");
    st.target = "";
    add_shared(st);
    st.flags = std::make_unique<ParamFlags>(st.cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  SubcommandState* active = nullptr;
  for (auto& st : subs) {
    if (st.cmd != nullptr && st.cmd->parsed()) active = &st;
  }
  if (active == nullptr) {
    std::fprintf(stderr, "config error: no subcommand selected\n");
    return 2;
  }

  try {
    qmux::cli::SweepSpec spec;
    if (!active->config_path.empty()) {
      spec = qmux::cli::parse_config(active->config_path);
      if (!active->target.empty() &&
          spec.target != qmux::cli::target_from_string(active->target)) {
        throw qmux::ConfigError("config file targets '" + qmux::cli::to_string(spec.target) +
                                "' but the subcommand is '" + active->target + "'");
      }
    } else {
      if (active->target.empty()) {
        throw qmux::ConfigError("'run' needs --config");
      }
      spec.target = qmux::cli::target_from_string(active->target);
    }
    if (active->seed_opt->count() > 0) spec.seed = active->seed;
    if (active->out_opt->count() > 0) spec.output_path = active->out_path;
    if (active->threads_opt->count() > 0) {
      spec.threads = active->threads;
    } else if (spec.threads == 0) {
      if (const char* env = std::getenv("QMUX_THREADS")) {
        spec.threads = std::atoi(env);
      }
    }
    active->flags->apply(spec.params);

    const qmux::cli::SweepOutcome outcome = qmux::cli::run_sweep(spec);
    std::printf("wrote %s (%zu rows, config %s)\n", outcome.csv_path.c_str(), outcome.rows,
                outcome.config_hash.c_str());
    return 0;
  } catch (const qmux::Error& e) {
    const int code = qmux::cli::exit_code_for(e);
    std::fprintf(stderr, "%s error: %s\n",
                 code == 2   ? "config"
                 : code == 3 ? "infeasible"
                 : code == 4 ? "io"
                             : "runtime",
                 e.what());
    return code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return qmux::cli::exit_code_for(e);
  }
}
