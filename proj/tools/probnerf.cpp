#include <iostream>

#include "commands.hpp"
#include "options.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic radiance fields: data, training, inference and ablations"};
  app.require_subcommand(1);
  const auto commands = probnerf::cli::register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  for (const auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      c.run();
      return 0;
    } catch (const probnerf::cli::UsageError& e) {
      std::cerr << c.app->get_name() << ": " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << c.app->get_name() << ": error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}
