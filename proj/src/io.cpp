#include "dppdyn/io.hpp"

#include <charconv>
#include <fstream>

#include "dppdyn/errors.hpp"

namespace dppdyn {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out << content;
  if (!out) throw ValidationError("failed writing output file: " + path);
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string samples_csv(const std::vector<Configuration>& samples, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ',';
    out += "site_" + std::to_string(i);
  }
  out += '\n';
  for (const Configuration& g : samples) {
    for (int i = 0; i < n; ++i) {
      if (i) out += ',';
      out += g.contains(i) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

std::string measure_csv(const MeasureTable& mu) {
  std::string out = "bitmask,probability\n";
  for (std::uint64_t mask = 0; mask < mu.states(); ++mask) {
    out += std::to_string(mask);
    out += ',';
    out += format_double(mu.prob(mask));
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const Trajectory& traj, int n) {
  if (n > 64) throw ValidationError("trajectory CSV export requires n <= 64");
  std::string out = "time,kind,x,y,bitmask\n";
  std::uint64_t mask = traj.initial.mask();
  out += "0,initial,-1,-1," + std::to_string(mask) + '\n';
  for (const Event& ev : traj.events) {
    const char* kind = ev.kind == EventKind::Birth
                           ? "birth"
                           : (ev.kind == EventKind::Death ? "death" : "hop");
    if (ev.kind == EventKind::Birth) {
      mask |= (1ULL << ev.x);
    } else if (ev.kind == EventKind::Death) {
      mask &= ~(1ULL << ev.x);
    } else {
      mask = (mask & ~(1ULL << ev.x)) | (1ULL << ev.y);
    }
    out += format_double(ev.time);
    out += ',';
    out += kind;
    out += ',';
    out += std::to_string(ev.x);
    out += ',';
    out += std::to_string(ev.y);
    out += ',';
    out += std::to_string(mask);
    out += '\n';
  }
  return out;
}

std::string generator_csv(const GeneratorMatrix& q) {
  std::string out = "row_bitmask,col_bitmask,rate\n";
  const auto& mat = q.matrix();
  for (Eigen::Index row = 0; row < mat.rows(); ++row) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat, row);
         it; ++it) {
      out += std::to_string(row);
      out += ',';
      out += std::to_string(it.col());
      out += ',';
      out += format_double(it.value());
      out += '\n';
    }
  }
  return out;
}

std::string correlations_order1_csv(const CorrelationTable& table,
                                    const Eigen::VectorXd& target) {
  std::string out = "site,target,estimate,stderr\n";
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(target[i]);
    out += ',';
    out += format_double(table.value[i]);
    out += ',';
    out += format_double(table.stderr_value[i]);
    out += '\n';
  }
  return out;
}

std::string correlations_order2_csv(const CorrelationTable& table,
                                    const Eigen::MatrixXd& target) {
  std::string out = "site_i,site_j,target,estimate,stderr\n";
  for (Eigen::Index i = 0; i < target.rows(); ++i)
    for (Eigen::Index j = i + 1; j < target.cols(); ++j) {
      out += std::to_string(i);
      out += ',';
      out += std::to_string(j);
      out += ',';
      out += format_double(target(i, j));
      out += ',';
      out += format_double(table.pair_value(i, j));
      out += ',';
      out += format_double(table.pair_stderr(i, j));
      out += '\n';
    }
  return out;
}

} // namespace dppdyn
