#pragma once

#include <string>
#include <vector>

#include "paramp/config.hpp"

namespace paramp {

// I/O problem while writing artifacts (distinct from solver failures for the
// command line exit code mapping).
class OutputError : public Error {
public:
    using Error::Error;
};

struct RunResult {
    std::vector<std::string> files;  // paths of everything written
};

// Executes the configured task and writes CSV/matrix artifacts plus a run
// manifest into out_dir. Outputs are byte-identical for identical
// (config, seed, version). seed_override, when >= 0, replaces numerics.seed.
RunResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                         long seed_override = -1);

const char* paramp_version();

}  // namespace paramp
