#include "camcover/config.hpp"

#include <fstream>

#include "camcover/net.hpp"
#include <json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

namespace camcover {

using nlohmann::json;

void TrainerConfig::validate() const {
  if (!(gamma >= 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("gamma must lie in [0, 1)");
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (lr_end < 0.0 || lr_end > lr)
    throw std::invalid_argument("need 0 <= lr_end <= lr");
  if (batch_episodes < 1)
    throw std::invalid_argument("batch must hold at least one episode");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 ||
      epsilon_end > epsilon_start)
    throw std::invalid_argument("need 0 <= epsilon_end <= epsilon_start <= 1");
  if (epsilon_anneal_steps < 1)
    throw std::invalid_argument("anneal duration must be positive");
  if (target_sync_episodes < 1)
    throw std::invalid_argument("target sync period must be positive");
  if (total_steps < 1) throw std::invalid_argument("total steps must be positive");
  if (buffer_capacity < 1)
    throw std::invalid_argument("buffer capacity must be positive");
  if (grad_clip <= 0.0) throw std::invalid_argument("grad clip must be positive");
  if (train_every_episodes < 1 || updates_per_train < 1)
    throw std::invalid_argument("train cadence must be positive");
  if (checkpoint_every_episodes < 1)
    throw std::invalid_argument("checkpoint cadence must be positive");
  if (eval_every_episodes < 0 || eval_episodes < 1)
    throw std::invalid_argument("bad evaluation cadence");
}

void RunConfig::validate() const {
  env.validate();
  noise.validate();
  reward.validate();
  trainer.validate();
  net::Topology topo;
  topo.n_agents = env.n_cameras;
  topo.obs_dim = encoded_feature_dim(env);
  topo.extra_dim = encoded_extra_dim(env);
  topo.enc1 = network.enc1;
  topo.enc2 = network.enc2;
  topo.trunk = network.trunk;
  topo.hidden = network.hidden;
  topo.validate();
}

namespace {

// Strict field reader: unknown keys are configuration typos and rejected.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object())
      throw std::invalid_argument("config section '" + name_ +
                                  "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        out = it->get<T>();
      } catch (const json::exception&) {
        throw std::invalid_argument("config key '" + name_ + "." + key +
                                    "' has the wrong type");
      }
    }
  }

  void get_angle_deg(const char* key, double& out_rad) {
    double deg = geometry::rad_to_deg(out_rad);
    get(key, deg);
    out_rad = geometry::deg_to_rad(deg);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key()))
        throw std::invalid_argument("unknown config key '" + name_ + "." +
                                    it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

json ablation_to_json(const AblationFlags& f) {
  json arr = json::array();
  if (!f.team) arr.push_back("team");
  if (!f.box) arr.push_back("box");
  if (!f.vis) arr.push_back("vis");
  if (!f.dir) arr.push_back("dir");
  if (!f.pos) arr.push_back("pos");
  return arr;
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["outdir"] = c.outdir;

  json& e = j["env"];
  e["court_half_x"] = c.env.court_half_x;
  e["court_half_y"] = c.env.court_half_y;
  e["n_targets"] = c.env.n_targets;
  e["n_cameras"] = c.env.n_cameras;
  e["camera_height"] = c.env.camera_height;
  e["frame_width"] = c.env.frame_width;
  e["frame_height"] = c.env.frame_height;
  e["hfov_deg"] = geometry::rad_to_deg(c.env.base_hfov);
  e["episode_length"] = c.env.episode_length;
  e["target_speed"] = c.env.target_speed;
  e["destination_timeout"] = c.env.destination_timeout;
  e["mu_min"] = c.env.mu_min;
  e["mu_max"] = c.env.mu_max;
  e["zoom_min"] = c.env.zoom_min;
  e["zoom_max"] = c.env.zoom_max;
  e["translation_step"] = c.env.translation_step;
  e["rotation_step_deg"] = geometry::rad_to_deg(c.env.rotation_step);
  e["zoom_step"] = c.env.zoom_step;
  e["pitch_deg"] = geometry::rad_to_deg(c.env.camera_pitch);
  e["target_half_width"] = c.env.target_half_width;
  e["target_half_depth"] = c.env.target_half_depth;
  e["target_height"] = c.env.target_height;
  e["max_slots"] = c.env.max_slots;

  json& n = j["noise"];
  n["enabled"] = c.noise.enabled;
  n["miss_probability"] = c.noise.miss_probability;
  n["pixel_jitter_sigma"] = c.noise.pixel_jitter_sigma;

  json& r = j["reward"];
  r["team_weight"] = c.reward.team_weight;
  r["lambda_vis"] = c.reward.lambda_vis;
  r["lambda_dir"] = c.reward.lambda_dir;
  r["lambda_pos"] = c.reward.lambda_pos;
  r["alpha_max_deg"] = geometry::rad_to_deg(c.reward.alpha_max);
  r["mu_max"] = c.reward.mu_max;
  r["mu_min"] = c.reward.mu_min;
  r["d_max"] = c.reward.d_max;
  r["ablate"] = ablation_to_json(c.ablation);

  json& w = j["network"];
  w["enc1"] = c.network.enc1;
  w["enc2"] = c.network.enc2;
  w["trunk"] = c.network.trunk;
  w["hidden"] = c.network.hidden;

  json& t = j["trainer"];
  t["gamma"] = c.trainer.gamma;
  t["lr"] = c.trainer.lr;
  t["lr_end"] = c.trainer.lr_end;
  t["batch_episodes"] = c.trainer.batch_episodes;
  t["epsilon_start"] = c.trainer.epsilon_start;
  t["epsilon_end"] = c.trainer.epsilon_end;
  t["epsilon_anneal_steps"] = c.trainer.epsilon_anneal_steps;
  t["target_sync_episodes"] = c.trainer.target_sync_episodes;
  t["total_steps"] = c.trainer.total_steps;
  t["buffer_capacity"] = c.trainer.buffer_capacity;
  t["grad_clip"] = c.trainer.grad_clip;
  t["bootstrap_truncated"] = c.trainer.bootstrap_truncated;
  t["train_every_episodes"] = c.trainer.train_every_episodes;
  t["updates_per_train"] = c.trainer.updates_per_train;
  t["checkpoint_every_episodes"] = c.trainer.checkpoint_every_episodes;
  t["eval_every_episodes"] = c.trainer.eval_every_episodes;
  t["eval_episodes"] = c.trainer.eval_episodes;
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  Section root(j, "root");
  root.get("seed", c.seed);
  root.get("outdir", c.outdir);

  // Consume section keys from the root before strict-checking it.
  json env_j = json::object(), noise_j = json::object(),
       reward_j = json::object(), net_j = json::object(),
       trainer_j = json::object();
  root.get("env", env_j);
  root.get("noise", noise_j);
  root.get("reward", reward_j);
  root.get("network", net_j);
  root.get("trainer", trainer_j);
  root.finish();

  Section e(env_j, "env");
  e.get("court_half_x", c.env.court_half_x);
  e.get("court_half_y", c.env.court_half_y);
  e.get("n_targets", c.env.n_targets);
  e.get("n_cameras", c.env.n_cameras);
  e.get("camera_height", c.env.camera_height);
  e.get("frame_width", c.env.frame_width);
  e.get("frame_height", c.env.frame_height);
  e.get_angle_deg("hfov_deg", c.env.base_hfov);
  e.get("episode_length", c.env.episode_length);
  e.get("target_speed", c.env.target_speed);
  e.get("destination_timeout", c.env.destination_timeout);
  e.get("mu_min", c.env.mu_min);
  e.get("mu_max", c.env.mu_max);
  e.get("zoom_min", c.env.zoom_min);
  e.get("zoom_max", c.env.zoom_max);
  e.get("translation_step", c.env.translation_step);
  e.get_angle_deg("rotation_step_deg", c.env.rotation_step);
  e.get("zoom_step", c.env.zoom_step);
  e.get_angle_deg("pitch_deg", c.env.camera_pitch);
  e.get("target_half_width", c.env.target_half_width);
  e.get("target_half_depth", c.env.target_half_depth);
  e.get("target_height", c.env.target_height);
  e.get("max_slots", c.env.max_slots);
  e.finish();

  Section n(noise_j, "noise");
  n.get("enabled", c.noise.enabled);
  n.get("miss_probability", c.noise.miss_probability);
  n.get("pixel_jitter_sigma", c.noise.pixel_jitter_sigma);
  n.finish();

  Section r(reward_j, "reward");
  r.get("team_weight", c.reward.team_weight);
  r.get("lambda_vis", c.reward.lambda_vis);
  r.get("lambda_dir", c.reward.lambda_dir);
  r.get("lambda_pos", c.reward.lambda_pos);
  r.get_angle_deg("alpha_max_deg", c.reward.alpha_max);
  r.get("mu_max", c.reward.mu_max);
  r.get("mu_min", c.reward.mu_min);
  r.get("d_max", c.reward.d_max);
  std::vector<std::string> ablate;
  r.get("ablate", ablate);
  for (const auto& name : ablate) apply_ablation_name(c.ablation, name);
  r.finish();

  Section w(net_j, "network");
  w.get("enc1", c.network.enc1);
  w.get("enc2", c.network.enc2);
  w.get("trunk", c.network.trunk);
  w.get("hidden", c.network.hidden);
  w.finish();

  Section t(trainer_j, "trainer");
  t.get("gamma", c.trainer.gamma);
  t.get("lr", c.trainer.lr);
  t.get("lr_end", c.trainer.lr_end);
  t.get("batch_episodes", c.trainer.batch_episodes);
  t.get("epsilon_start", c.trainer.epsilon_start);
  t.get("epsilon_end", c.trainer.epsilon_end);
  t.get("epsilon_anneal_steps", c.trainer.epsilon_anneal_steps);
  t.get("target_sync_episodes", c.trainer.target_sync_episodes);
  t.get("total_steps", c.trainer.total_steps);
  t.get("buffer_capacity", c.trainer.buffer_capacity);
  t.get("grad_clip", c.trainer.grad_clip);
  t.get("bootstrap_truncated", c.trainer.bootstrap_truncated);
  t.get("train_every_episodes", c.trainer.train_every_episodes);
  t.get("updates_per_train", c.trainer.updates_per_train);
  t.get("checkpoint_every_episodes", c.trainer.checkpoint_every_episodes);
  t.get("eval_every_episodes", c.trainer.eval_every_episodes);
  t.get("eval_episodes", c.trainer.eval_episodes);
  t.finish();

  c.validate();
  return c;
}

}  // namespace

void apply_ablation_name(AblationFlags& flags, const std::string& name) {
  if (name == "team") {
    flags.team = false;
  } else if (name == "box") {
    flags.box = false;
  } else if (name == "vis") {
    flags.vis = false;
  } else if (name == "dir") {
    flags.dir = false;
  } else if (name == "pos") {
    flags.pos = false;
  } else if (name == "all-individual") {
    flags.box = flags.vis = flags.dir = flags.pos = false;
  } else {
    throw std::invalid_argument(
        "unknown ablation '" + name +
        "' (expected team, box, vis, dir, pos or all-individual)");
  }
}

std::string ablation_names(const AblationFlags& flags) {
  return ablation_to_json(flags).dump();
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  try {
    return run_config_from_json_text(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error("config file " + path + ": " + e.what());
  }
}

RunConfig run_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
  }
  return from_json(j);
}

std::string run_config_to_json_text(const RunConfig& cfg) {
  return to_json(cfg).dump(2) + "\n";
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like section.key=value: " +
                                assignment);
  std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::string pointer = "/";
  for (char ch : key) pointer += ch == '.' ? '/' : ch;

  json j = to_json(cfg);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // bare strings are fine
  }
  try {
    j.at(json::json_pointer(pointer)) = parsed;
  } catch (const json::exception&) {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
  cfg = from_json(j);
}

std::uint64_t config_fingerprint(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace camcover
