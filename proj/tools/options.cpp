#include "options.hpp"

#include <algorithm>

#include "probnerf/binary_io.hpp"

namespace probnerf::cli {

std::string Options::key_of(const std::string& name) {
  std::string key = name;
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

CLI::Option* Options::flag(const std::string& name, bool& target, const std::string& help) {
  CLI::Option* opt = app_->add_flag("--" + name, target, help);
  bindings_.push_back({key_of(name), opt, [&target](const nlohmann::json& j) { target = j.get<bool>(); },
                       [&target] { return nlohmann::json(target); }});
  return opt;
}

void Options::register_config() {
  app_->add_option("--config", config_path_, "JSON file with default values for the flags")
      ->check(CLI::ExistingFile);
}

nlohmann::json Options::resolve() const {
  if (!config_path_.empty()) {
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(read_text(config_path_));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config " + config_path_ + ": " + e.what());
    }
    if (!file.is_object()) throw UsageError("config " + config_path_ + ": expected a JSON object");
    for (const auto& [key, value] : file.items()) {
      auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.key == key; });
      if (it == bindings_.end()) throw UsageError("config " + config_path_ + ": unknown key '" + key + "'");
      if (it->option->count() > 0) continue;
      try {
        it->set(value);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("config " + config_path_ + ": bad value for '" + key + "': " + e.what());
      }
    }
  }
  nlohmann::json effective = nlohmann::json::object();
  for (const Binding& b : bindings_) effective[b.key] = b.get();
  return effective;
}

std::string read_text(const std::filesystem::path& path) { return io::read_file(path); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  io::write_file(path, text);
}

void write_run_record(const std::filesystem::path& dir, const std::string& command,
                      const nlohmann::json& settings, std::uint64_t seed, const std::string& config_path) {
  std::filesystem::create_directories(dir);
  nlohmann::json run;
  run["command"] = command;
  run["seed"] = seed;
  run["settings"] = settings;
  run["config_file"] = config_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(config_path);
  write_text(dir / "run.json", run.dump(2) + "\n");
  write_text(dir / "seed.txt", std::to_string(seed) + "\n");
  if (!config_path.empty()) write_text(dir / "config.json", read_text(config_path));
}

}  // namespace probnerf::cli
