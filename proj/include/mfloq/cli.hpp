#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfloq/structure.hpp"
#include "mfloq/toml.hpp"

namespace mfloq::cli {

using json = nlohmann::ordered_json;

enum class Mode { Solve, Basis, Zmb, Planar, Check, Verify, Cov };

Mode mode_from_string(const std::string& s);
std::string mode_name(Mode m);

// Parsed problem file (TOML). Matrices enter as arrays of rows of [re, im]
// pairs (plain numbers are accepted as purely real entries).
struct ProblemFile {
    long version = 1;
    Mode mode = Mode::Solve;
    Mat A, B;
    MomentSequence seq = MomentSequence::factorial();
    bool mu_auto = true;
    std::vector<cplx> mu;  // one entry for most modes, two for planar-diagonal
    int truncation = 20;
    long p_max = 10000;
    Tolerances tol;
    std::optional<cplx> lambda;
    long n_offset = 0;
    Region region;
    std::optional<JordanDecomposition> jordan_hint;
};

ProblemFile parse_problem(const toml::Value& root);
ProblemFile parse_problem_file(const std::string& path);

struct Options {
    std::string out;  // output stem (single file) or directory (batch)
    bool csv = false;
    bool quiet = false;
    bool timing = false;  // off by default: keeps JSON byte-identical across runs
    std::optional<long> pmax_override;
    std::optional<int> trunc_override;
    std::optional<double> tol_override;
    std::optional<Region> region_override;
};

// --- serialization -------------------------------------------------------

json json_complex(cplx z);
cplx complex_from_json(const json& j);
json to_json(const GeneralizedSeries& s);
GeneralizedSeries series_from_json(const json& j);
json to_json(const LogPowerSolution& s);
json to_json(const SymbolicSolutionMatrix& sm);
json to_json(const H1Report& r);
json to_json(const H2Report& r);
json to_json(const Coro1Report& r);
json problem_to_json(const ProblemFile& p);

// --- driver ---------------------------------------------------------------

// Runs one problem and returns the result bundle. Hypothesis failures are
// reported in-band (status = "hypothesis_failed"); hard errors throw.
json run_problem(const ProblemFile& problem, const Options& opts);

// Deterministic plain-text rendering (fixed field order, 12 significant digits).
std::string format_report(const json& bundle);

// Full command line: mfloq <solve|basis|zmb|planar|check|verify|cov> <input>
// [--out p] [--pmax n] [--trunc n] [--tol x] [--region a,b,c,d] [--csv]
// [--quiet] [--timing]. Returns the process exit code: 0 ok, 2 hypothesis
// failure (report still written), 1 hard error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace mfloq::cli
