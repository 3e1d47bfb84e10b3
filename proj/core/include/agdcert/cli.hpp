#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace agdcert {

// Exit-code contract shared by every subcommand:
//   0 success, 1 property violation, 2 configuration error, 3 numerical
//   failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string command;  // "agd run", "agd certify", "gradcheck", "pep sweep", ...

  std::string problem_path;
  std::string schedule = "s1";
  int iters = 0;
  std::string geometry_override;  // "", "euclidean" or "entropy"
  double lipschitz_override = 0.0;

  std::string out_path;  // empty writes to stdout
  std::string format = "csv";
  std::uint64_t seed = 0;
  int threads = 1;

  // pep options
  int n = 5;
  int n_min = 3;
  int n_max = 10;
  std::vector<std::string> modes = {"general"};
  std::string mode = "general";
  double lipschitz = 1.0;
  double radius = 1.0;
  double tolerance = 1e-7;
  int max_iter = 200000;
  std::string cert_dir;
  std::string certificate_path;
  bool warm_start = false;
  bool timing = false;

  // agd certify / gradcheck options
  int ref_points = 8;
  int gradcheck_points = 20;
  double gradcheck_step = 1e-5;

  // sdp options
  std::string instance_path;
};

int cmd_agd_run(const RunConfig& config);
int cmd_gradcheck(const RunConfig& config);
int cmd_pep(const RunConfig& config);
int cmd_sdp_solve(const RunConfig& config);

// Full argv entry point (argv[0] excluded); used by the binary and by tests.
int run_main(const std::vector<std::string>& args);
int run_main(int argc, char** argv);

}  // namespace agdcert
