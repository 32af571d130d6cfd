#include <iostream>
#include <string>
#include <vector>

#include "gcgs/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  gcgs::cli::RunConfig cfg;
  try {
    cfg = gcgs::cli::parse_config(args);
  } catch (const gcgs::cli::HelpRequested& e) {
    std::cout << e.what();
    return 0;
  } catch (const gcgs::cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n"
              << "usage: gcgs <ot|enet> [flags] [--config file.json] --out trace.csv "
                 "--summary run.json\n";
    return 2;
  }

  try {
    const auto outcome = gcgs::cli::run(cfg);
    std::cout << outcome.summary["termination"].get<std::string>() << " after "
              << outcome.summary["iterations"] << " iterations, objective "
              << outcome.summary["final_objective"] << "\n";
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
