#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "sentinel/cli.hpp"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("sentinel"));
  return sentinel::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
