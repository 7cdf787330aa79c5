#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "camcover/config.hpp"

namespace camcover {

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// With baseline = true no checkpoint is needed; otherwise the checkpoint's
// topology must match the one implied by the config.
int cmd_eval(const std::string& checkpoint_path, bool baseline,
             const RunConfig& cfg, int n_runs, std::ostream& out,
             std::ostream& err);

int cmd_gradcheck(std::uint64_t seed, int trials, bool inject_fault,
                  std::ostream& out, std::ostream& err);

// Runs the coordinate-estimation benchmark. With noise disabled, a mean
// unclipped error of 50 world units or more is treated as a failure.
int cmd_ipt_bench(const RunConfig& cfg, int steps, std::ostream& out,
                  std::ostream& err);

}  // namespace camcover
