#pragma once

#include "cgode/adjoint.hpp"
#include "cgode/errormodel.hpp"

namespace cgode::harness {

// Process exit codes used by the CLI.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kConfigFailure = 2,
  kSolverFailure = 3,
  kCalibrationFailure = 4,
  kIoFailure = 5,
};

// Ordered key=value pairs echoed into every output file header so a run can
// be reproduced from the file alone.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

std::string echo_to_string(const ConfigEcho& echo);
ConfigEcho echo_from_string(const std::string& s);

// CSV dialect: '#'-prefixed header lines (format tag, command, config echo,
// column schema), comma-separated decimal-string rows. No timestamps or
// wall-clock content: identical configs produce bit-identical files.
void write_csv(const std::string& path, const std::string& command,
               const ConfigEcho& echo, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows,
               const std::vector<std::string>& trailing_comments = {});

struct CsvFile {
  std::string command;
  ConfigEcho echo;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};
CsvFile read_csv(const std::string& path);

// ---------------------------------------------------------------------------
// solve

struct SolveRequest {
  std::string problem = "lorenz";
  int digits = 16;
  int q = 1;
  std::string dt;
  std::string T;
  std::vector<std::string> u0 = {"1", "0", "0"};
  std::string residual_tol;  // empty = 100 eps
  std::string out;           // trajectory file path (empty = keep in memory)
  long checkpoint_every = 0;
  std::string checkpoint_path;
  std::string resume_from;  // checkpoint file
  std::vector<std::string> param_overrides;  // e.g. "r=28.5"
  bool guess_previous = false;  // polynomial extrapolation initial guess
  bool store_trajectory = true;
  bool progress = false;
};

struct SolveOutcome {
  std::vector<std::string> final_state;
  IntegrationStats stats;
  long total_steps = 0;
  std::string trajectory_path;
};

SolveOutcome run_solve(const SolveRequest& req);

// Writes / reads full-resume checkpoints.
void write_checkpoint(const std::string& path, const SolveRequest& req,
                      long completed_steps, const BigScalar& t,
                      const Vector& u);
struct Checkpoint {
  long step = 0;
  std::string t_decimal;
  std::vector<std::string> u_decimal;
  ConfigEcho config;
};
Checkpoint read_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// pair-converge

struct PairRequest {
  std::string problem = "lorenz";
  int digits = 16;
  int q_low = 2;
  int q_high = 4;
  std::string dt;
  std::string T_max;
  std::vector<std::string> u0 = {"1", "0", "0"};
  std::string tol;        // empty = max(1e-16, 10^(2-digits))
  std::string sample_dt = "0.25";
  std::string out;
};

struct PairOutcome {
  DivergenceReport report;
  std::vector<std::pair<std::string, std::string>> samples;  // (t, gap)
  bool degenerate_equal_orders = false;
};

// Streams both integrations side by side (bounded memory) and scans their
// gap; the divergence bracket is refined by bisection over a rolling window
// of recent intervals.
PairOutcome run_pair_converge(const PairRequest& req);

// ---------------------------------------------------------------------------
// sweep-k

struct ReferenceSpec {
  int q = 0;        // 0 = auto (q + 3)
  int digits = 0;   // 0 = auto (2 * digits)
  std::string dt;   // empty = auto (k_min / 2)
};

struct SweepRequest {
  std::string problem = "lorenz";
  int digits = 16;
  int q = 1;
  std::string T;
  std::vector<std::string> k_list;
  std::vector<std::string> u0 = {"1", "0", "0"};
  ReferenceSpec reference;
  std::string cache_dir = ".cgode-cache";
  std::string saturation = "1";  // errors above this leave the slope fits
  int workers = 1;
  std::string out;
};

struct SweepOutcome {
  std::vector<std::pair<std::string, std::string>> rows;  // (k, error)
  std::optional<LineFit> left_fit;    // round-off branch (small k)
  std::optional<LineFit> right_fit;   // discretization branch (large k)
  std::string left_fit_note;
  std::string right_fit_note;
  ConfigEcho reference_echo;
  std::vector<std::string> largest_k_final;  // final state at max k
};

SweepOutcome run_sweep(const SweepRequest& req);

// ---------------------------------------------------------------------------
// stability

struct StabilityRequest {
  std::string problem = "lorenz";
  int digits = 64;
  int q = 6;                 // primal order
  std::string dt = "0.005";  // primal step
  std::vector<std::string> u0 = {"1", "0", "0"};
  std::string primal_file;   // load instead of solving when nonempty
  std::vector<std::string> T_list;
  int dual_q = 0;            // 0 = auto
  std::string dual_dt;       // empty = primal dt
  std::vector<std::string> z_T = {"1", "0", "0"};
  int p = 0;
  bool fit = true;
  std::string extrapolate_T;  // e.g. "1000"; empty = none
  int workers = 1;
  std::string out;
};

struct StabilityRow {
  std::string T;
  std::string S_D, S_G, S_C, S_C2;  // scientific decimal strings
  std::string error;                 // per-point failure, if any
};

struct StabilityOutcome {
  std::vector<StabilityRow> rows;
  std::optional<LineFit> rate_fit;  // log10 S_C versus T
  std::string extrapolated_log10_SC;
};

StabilityOutcome run_stability(const StabilityRequest& req);

// ---------------------------------------------------------------------------
// calibrate / predict

struct CalibrateRequest {
  std::vector<std::string> sweep_files;  // CSVs produced by sweep-k
  std::string gamma = "0.388";
  std::string c1;  // empty = 0.5
  int digits = 64;
  std::string out;  // model file
};

struct CalibrateOutcome {
  ErrorModel model;
  std::string model_path;
};

CalibrateOutcome run_calibrate(const CalibrateRequest& req);

struct PredictRequest {
  std::string model_file;  // empty = reported-constants model
  int digits = 64;
  int q = 1;
  std::string eps;         // machine epsilon, e.g. "1e-16"
  std::string dt;          // empty = use optimal
  std::string T;           // empty = skip error prediction
  std::string target_eps;  // empty = skip T_eps
  std::string data_err = "0";
  std::string out;
};

struct PredictOutcome {
  std::string optimal_dt;
  std::string predicted_error;       // empty when T not given
  std::string horizon;               // T(eps_mach) = 2.5 n_mach
  std::string horizon_target;        // T_eps, empty when target not given
  std::string horizon_target_prefactor;  // nonempty when a calibrated
                                         // model's 2 C2[q] replaced 0.002
};

PredictOutcome run_predict(const PredictRequest& req);

// ---------------------------------------------------------------------------
// quad-table / replay

struct QuadTableRequest {
  std::string family = "legendre";  // or "lobatto"
  int n = 5;
  int digits = 64;
  std::string out;
};
void run_quad_table(const QuadTableRequest& req, std::ostream& os);

// Re-runs the command recorded in an output file's header, writing to
// out_path. Returns the command name that was replayed.
std::string run_replay(const std::string& recorded_file,
                       const std::string& out_path);

// Default pair tolerance: max(1e-16, 10^(2 - digits)).
std::string default_pair_tolerance(int digits);

}  // namespace cgode::harness
