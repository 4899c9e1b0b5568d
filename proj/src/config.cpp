#include "vdrive/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace vdrive {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + value + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_integer<std::size_t>(key, trim(item)));
  return out;
}

std::string fmt_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Field {
  std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Field int_field(T TrainConfig::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_integer<T>(k, v);
          },
          [member](const TrainConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(double TrainConfig::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_double(k, v);
          },
          [member](const TrainConfig& c) { return fmt_double(c.*member); }};
}

template <typename T>
Field env_int(T EnvConfig::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.env.*member = parse_integer<T>(k, v);
          },
          [member](const TrainConfig& c) { return std::to_string(c.env.*member); }};
}

Field env_double(double EnvConfig::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.env.*member = parse_double(k, v);
          },
          [member](const TrainConfig& c) { return fmt_double(c.env.*member); }};
}

Field enc_size(std::size_t nn::EncoderSpec::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.encoder.*member = parse_integer<std::size_t>(k, v);
          },
          [member](const TrainConfig& c) { return std::to_string(c.encoder.*member); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"agent",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          try {
            c.agent = agents::parse_agent_kind(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(k + ": " + e.what());
          }
        },
        [](const TrainConfig& c) { return std::string(agents::to_string(c.agent)); }}},
      {"episodes", int_field(&TrainConfig::episodes)},
      {"gamma", double_field(&TrainConfig::gamma)},
      {"lr", double_field(&TrainConfig::lr)},
      {"lr_critic", double_field(&TrainConfig::lr_critic)},
      {"batch_size", int_field(&TrainConfig::batch_size)},
      {"window", int_field(&TrainConfig::window)},
      {"stride", int_field(&TrainConfig::stride)},
      {"train_fraction", double_field(&TrainConfig::train_fraction)},
      {"rolling_n", int_field(&TrainConfig::rolling_n)},
      {"max_episode_steps", int_field(&TrainConfig::max_episode_steps)},
      {"seed", int_field(&TrainConfig::seed)},
      {"hidden", int_field(&TrainConfig::hidden)},
      {"env.f_max", env_int(&EnvConfig::f_max)},
      {"env.angle_min", env_int(&EnvConfig::angle_min)},
      {"env.angle_max", env_int(&EnvConfig::angle_max)},
      {"env.angle_step", env_int(&EnvConfig::angle_step)},
      {"env.intersection_threshold", env_double(&EnvConfig::intersection_threshold)},
      {"env.collision_threshold", env_double(&EnvConfig::collision_threshold)},
      {"env.rest_timeout", env_int(&EnvConfig::rest_timeout)},
      {"env.alpha", env_double(&EnvConfig::alpha)},
      {"env.beta", env_double(&EnvConfig::beta)},
      {"env.delta", env_double(&EnvConfig::delta)},
      {"env.mu", env_double(&EnvConfig::mu)},
      {"env.nu", env_double(&EnvConfig::nu)},
      {"encoder.input_rows", enc_size(&nn::EncoderSpec::input_rows)},
      {"encoder.input_cols", enc_size(&nn::EncoderSpec::input_cols)},
      {"encoder.kernel", enc_size(&nn::EncoderSpec::kernel)},
      {"encoder.dense_out", enc_size(&nn::EncoderSpec::dense_out)},
      {"encoder.embed_size", enc_size(&nn::EncoderSpec::embed_size)},
      {"encoder.attn_size", enc_size(&nn::EncoderSpec::attn_size)},
      {"encoder.conv_channels",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          c.encoder.conv_channels = parse_list(k, v);
        },
        [](const TrainConfig& c) { return fmt_list(c.encoder.conv_channels); }}},
      {"dqn.replay_capacity", int_field(&TrainConfig::replay_capacity)},
      {"dqn.batch", int_field(&TrainConfig::dqn_batch)},
      {"dqn.target_sync", int_field(&TrainConfig::target_sync)},
      {"dqn.epsilon_start", double_field(&TrainConfig::epsilon_start)},
      {"dqn.epsilon_end", double_field(&TrainConfig::epsilon_end)},
      {"dqn.anneal_fraction", double_field(&TrainConfig::anneal_fraction)},
  };
  return table;
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& msg) { throw ConfigError(key + ": " + msg); };
  if (episodes < 1 || episodes > 1500) fail("episodes", "must lie in [1, 1500]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma", "must lie in [0, 1]");
  if (!(lr > 0.0)) fail("lr", "must be positive");
  if (!(lr_critic > 0.0)) fail("lr_critic", "must be positive");
  if (batch_size != 1 && batch_size != 3 && batch_size != 5) fail("batch_size", "must be 1, 3 or 5");
  if (window < 2) fail("window", "must be at least 2");
  if (stride < 1 || stride > window) fail("stride", "must lie in [1, window]");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction", "must lie in (0, 1)");
  if (rolling_n < 1) fail("rolling_n", "must be positive");
  if (max_episode_steps < 1) fail("max_episode_steps", "must be positive");
  if (hidden < 1) fail("hidden", "must be positive");
  if (replay_capacity < 1) fail("dqn.replay_capacity", "must be positive");
  if (dqn_batch < 1 || dqn_batch > replay_capacity) fail("dqn.batch", "must lie in [1, replay_capacity]");
  if (target_sync < 1) fail("dqn.target_sync", "must be positive");
  for (auto [key, v] : {std::pair{"dqn.epsilon_start", epsilon_start}, {"dqn.epsilon_end", epsilon_end},
                        {"dqn.anneal_fraction", anneal_fraction}}) {
    if (!(v >= 0.0 && v <= 1.0)) fail(key, "must lie in [0, 1]");
  }
  try {
    env.validate();
    encoder.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::map<std::string, std::string> TrainConfig::to_map() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : fields()) out[key] = field.get(*this);
  return out;
}

TrainConfig config_from_map(const std::map<std::string, std::string>& entries) {
  TrainConfig cfg;
  for (const auto& [key, value] : entries) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown key '" + key + "'");
    it->second.set(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

TrainConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    entries[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return config_from_map(entries);
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const TrainConfig& config) {
  std::string out;
  for (const auto& [key, value] : config.to_map()) out += key + "=" + value + "\n";
  return out;
}

EnvConfig resolve_env(const TrainConfig& config, int frame_width, int frame_height) {
  EnvConfig env = EnvConfig::for_frame(frame_width, frame_height);
  const EnvConfig& src = config.env;
  env.f_max = src.f_max;
  env.angle_min = src.angle_min;
  env.angle_max = src.angle_max;
  env.angle_step = src.angle_step;
  env.intersection_threshold = src.intersection_threshold;
  env.collision_threshold = src.collision_threshold;
  env.rest_timeout = src.rest_timeout;
  env.alpha = src.alpha;
  env.beta = src.beta;
  env.delta = src.delta;
  env.mu = src.mu;
  env.nu = src.nu;
  env.obs_rows = static_cast<int>(config.encoder.input_rows);
  env.obs_cols = static_cast<int>(config.encoder.input_cols);
  env.validate();
  return env;
}

nn::EncoderSpec resolve_encoder(const TrainConfig& config, const EnvConfig& env) {
  nn::EncoderSpec spec = config.encoder;
  spec.frame_width = env.frame_width;
  spec.f_max = env.f_max;
  return spec;
}

}  // namespace vdrive
