#include <iostream>
#include <string>
#include <vector>

#include "mfloq/cli.hpp"

namespace {

constexpr const char* kUsage = R"(mfloq - Floquet solutions of z d_m y = (zA + B) y

usage: mfloq <mode> <problem.toml | directory> [flags]

modes:
  check    hypothesis checks (H1)/(H1)'/(H2)/corollary criterion
  solve    one Floquet solution for the given (or auto) exponent
  basis    all independent Floquet solutions over the search region
  zmb      generalized matrix power z_m^B (A must be zero)
  planar   2x2 systems: both solutions, closed-form cross-checks
  verify   solve, then test the Jackson q-derivative realization
  cov      change of variable y = h(z) ytilde(z)

flags:
  --out <path>     output stem (single file) or directory (batch)
  --pmax <int>     hypothesis-scan depth override
  --trunc <int>    truncation order override
  --tol <float>    spectrum-membership tolerance factor override
  --region <re0,re1,im0,im1>  exponent search region
  --csv            also write <out>.coeffs.csv and <out>.eval.csv
  --quiet          suppress the text report
  --timing         record wall time in the JSON (off keeps output reproducible)

exit codes: 0 success, 2 hypothesis failure (report still written), 1 hard error
)";

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
        std::cout << kUsage;
        return args.empty() ? 1 : 0;
    }
    return mfloq::cli::run(args, std::cout, std::cerr);
}
