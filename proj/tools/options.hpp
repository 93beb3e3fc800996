#pragma once
// Flag registration shared by every subcommand. Each option may also be set
// from a JSON config file under the flag's long name with dashes replaced by
// underscores; flags given on the command line win.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace probnerf::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* add(const std::string& name, T& target, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, target, help)->capture_default_str();
    bindings_.push_back({key_of(name), opt, [&target](const nlohmann::json& j) { target = j.get<T>(); },
                         [&target] { return nlohmann::json(target); }});
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& target, const std::string& help);

  // Applies the config file (if any) beneath the command-line flags and
  // returns the effective settings as JSON.
  nlohmann::json resolve() const;

  const std::string& config_path() const { return config_path_; }
  void register_config();

 private:
  struct Binding {
    std::string key;
    CLI::Option* option;
    std::function<void(const nlohmann::json&)> set;
    std::function<nlohmann::json()> get;
  };
  static std::string key_of(const std::string& name);

  CLI::App* app_;
  std::vector<Binding> bindings_;
  std::string config_path_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Creates `dir` and records the command, effective settings and seed.
void write_run_record(const std::filesystem::path& dir, const std::string& command,
                      const nlohmann::json& settings, std::uint64_t seed, const std::string& config_path);

}  // namespace probnerf::cli
