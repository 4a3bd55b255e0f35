// SPDX-License-Identifier: Apache-2.0
//
// Regenerates the bundled desk-scale logistic-regression dataset
// (data/blr_synth.{train,test}.libsvm). The parameters mirror the built-in
// synthetic problem used when no LIBSVM paths are configured; the seed is
// fixed so the checked-in files are reproducible byte for byte.
//
// Usage: make_blr_dataset <out-dir>

#include <cstdio>
#include <filesystem>
#include <string>

#include <sgmcmc/data.hpp>

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <out-dir>\n", argv[0]);
    return 2;
  }
  const std::filesystem::path out_dir = argv[1];
  std::filesystem::create_directories(out_dir);

  const auto data = sgmcmc::generate_blr_data(/*n_train=*/2000, /*n_test=*/1000,
                                              /*n_features=*/123, /*nnz=*/14,
                                              /*coef_scale=*/0.5, /*seed=*/7);
  const std::string train = (out_dir / "blr_synth.train.libsvm").string();
  const std::string test = (out_dir / "blr_synth.test.libsvm").string();
  sgmcmc::write_libsvm(data.train, train);
  sgmcmc::write_libsvm(data.test, test);
  std::printf("wrote %s (%zu items) and %s (%zu items)\n", train.c_str(),
              data.train.size(), test.c_str(), data.test.size());
  return 0;
}
