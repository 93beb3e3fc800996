#pragma once
#include <CLI11.hpp>

#include <functional>
#include <memory>

namespace probnerf::cli {

// Registers every subcommand on `app`. The returned callbacks run the
// subcommand that was selected after parsing.
struct Command {
  CLI::App* app;
  std::function<void()> run;
};

std::vector<Command> register_commands(CLI::App& app);

}  // namespace probnerf::cli
