#pragma once

namespace postlab {

/// Exit codes: 0 ok, 2 usage or configuration error, 3 numeric failure.
int run_cli(int argc, char** argv);

}  // namespace postlab
