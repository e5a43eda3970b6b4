// Runs one reaching session: live over WebSocket, headless with the simulated human,
// or as a replay of a logged session's forces.

#include <CLI11.hpp>

#include <iostream>

#include "oacollab/oacollab.hpp"

using namespace oacollab;

int main(int argc, char** argv) {
  CLI::App app{"Reaching-task session service"};
  std::string config_file, mode, out_dir, replay;
  std::optional<std::uint64_t> seed;
  bool headless = false;
  bool no_server = false;
  app.add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_flag("--headless", headless, "simulated human, run as fast as possible");
  app.add_flag("--no-server", no_server, "headless without a WebSocket endpoint");
  app.add_option("--mode", mode, "individual | robot_follower | robot_equal | robot_leader | human_pair_replay");
  app.add_option("--seed", seed, "session seed");
  app.add_option("--out-dir", out_dir, "directory for logs and the summary");
  app.add_option("--replay", replay, "trial log whose recorded forces drive the session")->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    service::ServiceConfig cfg;
    if (!config_file.empty()) {
      cfg = service::load_config(config_file);
    } else {
      cfg.person = service::default_person(cfg.human);
    }
    if (!mode.empty()) cfg.session.mode = parse_mode(mode);
    if (seed) cfg.session.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    service::RunOptions opt;
    opt.headless = headless || !replay.empty();
    if (!replay.empty()) {
      const auto log = metrics::read_trial_log(replay);
      cfg.session.mode = log.mode;
      if (cfg.session_id.empty()) cfg.session_id = log.session_id + "-replay";
      std::vector<TrialSpec> trials;
      for (const auto& c : log.trials) trials.push_back(c.trial);
      opt.trials = std::move(trials);
      opt.human = service::replay_source_from_log(log);
      opt.disable_robot = true;  // the recorded total already includes the robot's share
    }
    std::optional<service::Endpoint> endpoint;
    if (!(opt.headless && no_server)) endpoint = cfg.endpoint;
    opt.on_listening = [](unsigned short port) { std::cerr << "listening on port " << port << "\n"; };

    const auto result = service::run_session(cfg, cfg.robot_config(), endpoint, opt);
    std::cerr << "trial log: " << result.log_path.string() << "\nsummary: " << result.summary_path.string() << "\n";
    std::cout << metrics::to_json(result.summary).dump(2) << "\n";
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
