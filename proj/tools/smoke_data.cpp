// Writes the bundled toy datasets as M4-style CSV.

#include <cstdint>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "xirpaug/app/ingest.hpp"
#include "xirpaug/app/smoke_data.hpp"
#include "xirpaug/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the seeded smoke-test datasets"};
  std::filesystem::path out = "smoke.csv";
  std::uint64_t seed = 7;
  app.add_option("--out", out, "Output CSV path");
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto data = xirpaug::app::smoke_datasets(seed);
    xirpaug::app::write_m4_csv(out, data);
    for (const auto& s : data) std::cout << s.id << ' ' << s.values.size() << '\n';
  } catch (const xirpaug::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
