#pragma once

#include "run_config.hpp"

namespace nnreach::cli {

/// Each command returns an exit code; failures are thrown.
int cmd_train(const RunConfig& rc);
int cmd_verify(const RunConfig& rc);
int cmd_safe_set(const RunConfig& rc);
int cmd_oracle(const RunConfig& rc);
int cmd_export_plots(const RunConfig& rc);

}  // namespace nnreach::cli
