#include "cgode/trajectory.hpp"

#include <fstream>
#include <sstream>

namespace cgode {

Trajectory::Trajectory(const PrecisionContext& ctx, int q, const BigScalar& t0,
                       const Vector& u0, ProblemInfo info)
    : digits_(ctx.digits()),
      q_(q),
      basis_(lobatto_basis_cached(q, ctx)),
      info_(std::move(info)) {
  partition_.push_back(t0);
  values_.push_back(u0);
}

void Trajectory::append_interval(const BigScalar& t_right,
                                 std::vector<Vector> nodes) {
  if (static_cast<int>(nodes.size()) != q_ + 1) {
    throw ConfigError("append_interval: expected " + std::to_string(q_ + 1) +
                      " nodal vectors");
  }
  if (!(t_right > partition_.back())) {
    throw DomainError("append_interval: partition must be strictly increasing");
  }
  partition_.push_back(t_right);
  for (int j = 1; j <= q_; ++j) {
    values_.push_back(std::move(nodes[static_cast<std::size_t>(j)]));
  }
}

const Vector& Trajectory::node_value(int interval, int node) const {
  return values_[static_cast<std::size_t>(interval) *
                     static_cast<std::size_t>(q_) +
                 static_cast<std::size_t>(node)];
}

int Trajectory::find_interval(const BigScalar& t) const {
  if (t < t_begin() || t > t_end()) {
    throw DomainError("time " + t.str(8) + " outside trajectory span [" +
                      t_begin().str(8) + ", " + t_end().str(8) + "]");
  }
  // Left-continuity: interval i owns (t_i, t_{i+1}]; t_begin belongs to 0.
  int lo = 0;
  int hi = intervals() - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (t <= partition_[static_cast<std::size_t>(mid + 1)]) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

void Trajectory::evaluate(const BigScalar& t, Vector& out) const {
  const int i = find_interval(t);
  const BigScalar& tl = partition_[static_cast<std::size_t>(i)];
  const BigScalar& tr = partition_[static_cast<std::size_t>(i + 1)];
  BigScalar tau = (t - tl) / (tr - tl);

  std::vector<Vector> nodes;
  nodes.reserve(static_cast<std::size_t>(q_ + 1));
  for (int j = 0; j <= q_; ++j) nodes.push_back(node_value(i, j));
  basis_->eval(nodes, tau, out);
}

Vector Trajectory::evaluate(const BigScalar& t) const {
  Vector out(PrecisionContext(digits_), values_.front().size());
  evaluate(t, out);
  return out;
}

Vector Trajectory::derivative(const BigScalar& t, int order,
                              bool* one_sided) const {
  if (order < 0 || order > q_) {
    throw CapabilityError("derivative order " + std::to_string(order) +
                          " not available for degree " + std::to_string(q_) +
                          " intervals");
  }
  if (one_sided) *one_sided = false;
  if (order == 0) return evaluate(t);

  const int i = find_interval(t);
  if (one_sided && i + 1 < intervals() &&
      t == partition_[static_cast<std::size_t>(i + 1)]) {
    *one_sided = true;  // interior partition point, left value returned
  }
  const PrecisionContext ctx(digits_);
  const BigScalar& tl = partition_[static_cast<std::size_t>(i)];
  const BigScalar& tr = partition_[static_cast<std::size_t>(i + 1)];
  const BigScalar k = tr - tl;
  BigScalar tau = (t - tl) / k;

  const int dim = values_.front().size();
  const Matrix& D = basis_->diff_matrix();

  // Repeated application of the reference differentiation matrix, then the
  // chain-rule factor k^-order.
  std::vector<Vector> work;
  work.reserve(static_cast<std::size_t>(q_ + 1));
  for (int j = 0; j <= q_; ++j) work.push_back(node_value(i, j));
  std::vector<Vector> next(static_cast<std::size_t>(q_ + 1), Vector(ctx, dim));
  for (int d = 0; d < order; ++d) {
    for (int r = 0; r <= q_; ++r) {
      Vector& dst = next[static_cast<std::size_t>(r)];
      dst.set_zero();
      for (int c = 0; c <= q_; ++c) {
        dst.add_scaled(D.at(r, c), work[static_cast<std::size_t>(c)]);
      }
    }
    std::swap(work, next);
  }

  Vector out(ctx, dim);
  basis_->eval(work, tau, out);
  const BigScalar kp = pow(k, static_cast<long>(order));
  for (int c = 0; c < dim; ++c) out[c] /= kp;
  return out;
}

Trajectory Trajectory::time_reversed() const {
  const PrecisionContext ctx(digits_);
  const int M = intervals();
  const BigScalar total = t_begin() + t_end();

  // Node symmetry about 1/2 (to roundoff) is what makes index reversal work.
  const auto& nodes = basis_->nodes();
  const BigScalar one(ctx, 1);
  const BigScalar sym_tol = ctx.eps() * 4;
  for (int j = 0; j <= q_; ++j) {
    BigScalar s = nodes[static_cast<std::size_t>(j)] +
                  nodes[static_cast<std::size_t>(q_ - j)];
    s -= one;
    s.abs_assign();
    if (s > sym_tol) {
      throw CapabilityError("time_reversed requires a symmetric node set");
    }
  }

  Trajectory rev;
  rev.digits_ = digits_;
  rev.q_ = q_;
  rev.basis_ = basis_;
  rev.info_ = info_;
  rev.info_.name += "(time-reversed)";
  rev.partition_.reserve(static_cast<std::size_t>(M + 1));
  for (int i = M; i >= 0; --i) {
    rev.partition_.push_back(total - partition_[static_cast<std::size_t>(i)]);
  }
  rev.values_.reserve(values_.size());
  // Reversed interval i' = M-1-i, reversed node order within each interval;
  // shared boundaries remain shared.
  rev.values_.push_back(node_value(M - 1, q_));
  for (int ip = 0; ip < M; ++ip) {
    const int i = M - 1 - ip;
    for (int j = 1; j <= q_; ++j) {
      rev.values_.push_back(node_value(i, q_ - j));
    }
  }
  return rev;
}

namespace {

void write_line(std::ostream& os, const std::string& s) { os << s << '\n'; }

std::string expect_keyed_line(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) {
    throw IoError(IoError::Code::kTruncated,
                  "trajectory file truncated before key '" + key + "'");
  }
  if (line.rfind(key + " ", 0) != 0) {
    throw IoError(IoError::Code::kMalformed,
                  "expected key '" + key + "', found: " + line);
  }
  return line.substr(key.size() + 1);
}

}  // namespace

void Trajectory::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) {
    throw IoError(IoError::Code::kOpenFailed, "cannot open '" + path +
                                                  "' for writing");
  }
  const int M = intervals();
  write_line(os, "cgode-trajectory");
  write_line(os, "version 1");
  write_line(os, "problem " + (info_.name.empty() ? "-" : info_.name));
  write_line(os, "digits " + std::to_string(digits_));
  write_line(os, "q " + std::to_string(q_));
  write_line(os, "basis lobatto");
  write_line(os, "M " + std::to_string(M));
  write_line(os, "params " + (info_.params.empty() ? "-" : info_.params));
  {
    std::string u0 = "u0";
    for (const auto& s : info_.u0_decimal) u0 += " " + s;
    write_line(os, u0);
  }
  for (int i = 0; i <= M; ++i) {
    write_line(os, "t " + std::to_string(i) + " " +
                       partition_[static_cast<std::size_t>(i)].str_exact());
  }
  const int dim = values_.front().size();
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j <= q_; ++j) {
      const Vector& v = node_value(i, j);
      for (int c = 0; c < dim; ++c) {
        write_line(os, std::to_string(i) + " " + std::to_string(j) + " " +
                           std::to_string(c) + " " + v[c].str_exact());
      }
    }
  }
  write_line(os, "end");
  if (!os) {
    throw IoError(IoError::Code::kOpenFailed, "write to '" + path + "' failed");
  }
}

Trajectory Trajectory::load(const std::string& path,
                            const PrecisionContext& ctx) {
  std::ifstream is(path);
  if (!is) {
    throw IoError(IoError::Code::kOpenFailed, "cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(is, line) || line != "cgode-trajectory") {
    throw IoError(IoError::Code::kMalformed,
                  "'" + path + "' is not a cgode trajectory file");
  }
  const std::string version = expect_keyed_line(is, "version");
  if (version != "1") {
    throw IoError(IoError::Code::kVersionMismatch,
                  "unsupported trajectory format version " + version);
  }
  ProblemInfo info;
  info.name = expect_keyed_line(is, "problem");
  if (info.name == "-") info.name.clear();
  const int file_digits = std::stoi(expect_keyed_line(is, "digits"));
  if (file_digits != ctx.digits()) {
    throw IoError(IoError::Code::kDigitMismatch,
                  "trajectory was written at " + std::to_string(file_digits) +
                      " digits; current context has " +
                      std::to_string(ctx.digits()) +
                      " (no silent precision change)");
  }
  const int q = std::stoi(expect_keyed_line(is, "q"));
  const std::string family = expect_keyed_line(is, "basis");
  if (family != "lobatto") {
    throw IoError(IoError::Code::kMalformed, "unknown basis family " + family);
  }
  const int M = std::stoi(expect_keyed_line(is, "M"));
  if (M < 1 || q < 1) {
    throw IoError(IoError::Code::kMalformed, "degenerate trajectory header");
  }
  info.params = expect_keyed_line(is, "params");
  if (info.params == "-") info.params.clear();
  {
    std::istringstream u0s(expect_keyed_line(is, "u0"));
    std::string tok;
    while (u0s >> tok) info.u0_decimal.push_back(tok);
  }
  const int dim = static_cast<int>(info.u0_decimal.size());
  if (dim < 1) {
    throw IoError(IoError::Code::kMalformed, "missing u0 in header");
  }

  std::vector<BigScalar> partition;
  partition.reserve(static_cast<std::size_t>(M + 1));
  for (int i = 0; i <= M; ++i) {
    std::istringstream ls(expect_keyed_line(is, "t " + std::to_string(i)));
    std::string value;
    ls >> value;
    partition.push_back(parse_decimal(value, ctx));
  }

  Vector u0(ctx, dim);
  for (int c = 0; c < dim; ++c) u0[c] = parse_decimal(info.u0_decimal[static_cast<std::size_t>(c)], ctx);

  Trajectory traj(ctx, q, partition[0], u0, info);
  std::vector<std::string> prev_right(static_cast<std::size_t>(dim));
  for (int c = 0; c < dim; ++c) prev_right[static_cast<std::size_t>(c)] = u0[c].str_exact();

  for (int i = 0; i < M; ++i) {
    std::vector<Vector> nodes(static_cast<std::size_t>(q + 1), Vector(ctx, dim));
    for (int j = 0; j <= q; ++j) {
      for (int c = 0; c < dim; ++c) {
        if (!std::getline(is, line)) {
          throw IoError(IoError::Code::kTruncated,
                        "trajectory body truncated at interval " +
                            std::to_string(i));
        }
        std::istringstream ls(line);
        int fi = -1, fj = -1, fc = -1;
        std::string value;
        ls >> fi >> fj >> fc >> value;
        if (fi != i || fj != j || fc != c || value.empty()) {
          throw IoError(IoError::Code::kMalformed,
                        "unexpected body line: " + line);
        }
        if (j == 0) {
          // Shared node: must reproduce the previous interval bit-exactly.
          if (value != prev_right[static_cast<std::size_t>(c)]) {
            throw IoError(IoError::Code::kMalformed,
                          "continuity violated at interval " +
                              std::to_string(i) + " component " +
                              std::to_string(c));
          }
        }
        nodes[static_cast<std::size_t>(j)][c] = parse_decimal(value, ctx);
        if (j == q) prev_right[static_cast<std::size_t>(c)] = value;
      }
    }
    traj.append_interval(partition[static_cast<std::size_t>(i + 1)],
                         std::move(nodes));
  }
  if (!std::getline(is, line) || line != "end") {
    throw IoError(IoError::Code::kTruncated, "missing end marker");
  }
  return traj;
}

DivergenceReport divergence_scan(
    const std::function<void(const BigScalar&, Vector&)>& eval_a,
    const std::function<void(const BigScalar&, Vector&)>& eval_b,
    const BigScalar& t_begin, const BigScalar& t_end, int dimension,
    const BigScalar& tol, const BigScalar& sample_dt) {
  const PrecisionContext ctx = tol.ctx();
  if (!(tol > BigScalar(ctx, 0)) || !(sample_dt > BigScalar(ctx, 0))) {
    throw ConfigError("divergence scan requires positive tol and sample_dt");
  }
  if (!(t_end >= t_begin)) {
    throw DomainError("divergence scan: empty time span");
  }

  Vector va(ctx, dimension), vb(ctx, dimension);
  BigScalar gap(ctx), comp(ctx);
  auto gap_at = [&](const BigScalar& t) {
    eval_a(t, va);
    eval_b(t, vb);
    gap.set_zero();
    for (int c = 0; c < dimension; ++c) {
      comp.set(va[c]);
      comp -= vb[c];
      comp.abs_assign();
      if (comp > gap) gap.set(comp);
    }
    return gap;
  };

  DivergenceReport report{std::nullopt, BigScalar(ctx, 0), tol, sample_dt};

  BigScalar lo(ctx);
  BigScalar hi(ctx);
  bool bracketed = false;
  BigScalar t(t_begin);
  long i = 0;
  bool at_last = false;
  BigScalar prev(t_begin);
  while (true) {
    if (gap_at(t) > tol) {
      if (i == 0) {
        report.t_div = t_begin;  // diverged from the very first sample
        return report;
      }
      lo = prev;
      hi = t;
      bracketed = true;
      break;
    }
    if (report.max_gap_before < gap) report.max_gap_before.set(gap);
    if (at_last) break;
    prev = t;
    ++i;
    t = t_begin + sample_dt * i;
    if (t >= t_end) {
      t = t_end;
      at_last = true;
    }
  }
  if (!bracketed) return report;  // never diverged within span

  // Bisect to resolution sample_dt / 2^20; invariant: gap(hi) > tol.
  BigScalar mid(ctx);
  for (int it = 0; it < 20; ++it) {
    mid = lo + hi;
    mid /= 2;
    if (gap_at(mid) > tol) {
      hi.set(mid);
    } else {
      if (report.max_gap_before < gap) report.max_gap_before.set(gap);
      lo.set(mid);
    }
  }
  report.t_div = hi;
  return report;
}

DivergenceReport divergence_time(const Trajectory& a, const Trajectory& b,
                                 const BigScalar& tol,
                                 const BigScalar& sample_dt) {
  const BigScalar t0 = max(a.t_begin(), b.t_begin());
  const BigScalar t1 = min(a.t_end(), b.t_end());
  if (!(t1 > t0) && !(t1 == t0)) {
    throw DomainError("divergence_time: trajectory spans do not overlap");
  }
  return divergence_scan(
      [&a](const BigScalar& t, Vector& out) { a.evaluate(t, out); },
      [&b](const BigScalar& t, Vector& out) { b.evaluate(t, out); }, t0, t1,
      a.node_value(0, 0).size(), tol, sample_dt);
}

RollingWindow::RollingWindow(const PrecisionContext& ctx, int q, int dimension)
    : digits_(ctx.digits()),
      dimension_(dimension),
      basis_(lobatto_basis_cached(q, ctx)) {}

void RollingWindow::push_interval(const BigScalar& t_left,
                                  const BigScalar& t_right,
                                  std::vector<Vector> nodes) {
  win_.push_back(Interval{t_left, t_right, std::move(nodes)});
}

void RollingWindow::drop_before(const BigScalar& t) {
  while (win_.size() > 1 && win_.front().t_right < t) win_.pop_front();
}

const BigScalar& RollingWindow::t_begin() const {
  if (win_.empty()) throw DomainError("empty rolling window");
  return win_.front().t_left;
}

const BigScalar& RollingWindow::t_end() const {
  if (win_.empty()) throw DomainError("empty rolling window");
  return win_.back().t_right;
}

void RollingWindow::evaluate(const BigScalar& t, Vector& out) const {
  if (win_.empty() || t < t_begin() || t > t_end()) {
    throw DomainError("rolling window evaluation outside retained span");
  }
  // Binary search over the deque (left-continuous, as Trajectory).
  std::size_t lo = 0;
  std::size_t hi = win_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (t <= win_[mid].t_right) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const Interval& iv = win_[lo];
  BigScalar tau = (t - iv.t_left) / (iv.t_right - iv.t_left);
  basis_->eval(iv.nodes, tau, out);
}

}  // namespace cgode
