#ifndef DPPDYN_IO_HPP
#define DPPDYN_IO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dppdyn/ctmc.hpp"
#include "dppdyn/generator.hpp"
#include "dppdyn/measure.hpp"
#include "dppdyn/sampler.hpp"

namespace dppdyn {

/// 17 significant digits, locale-independent ('.' decimal separator).
std::string format_double(double v);

std::uint64_t fnv1a64(const std::string& data);

void write_text_file(const std::string& path, const std::string& content);

/// Row-major matrix dump, one row per line.
std::string matrix_csv(const Eigen::MatrixXd& m);

/// One row per draw, columns = occupancy bits site_0..site_{n-1}.
std::string samples_csv(const std::vector<Configuration>& samples, int n);

/// Columns: subset bitmask, probability.
std::string measure_csv(const MeasureTable& mu);

/// Columns: time, event kind, site x, site y (-1 unless hop), resulting
/// occupancy bitmask. Requires n <= 64.
std::string trajectory_csv(const Trajectory& traj, int n);

/// Sparse triplets: row-state bitmask, col-state bitmask, rate.
std::string generator_csv(const GeneratorMatrix& q);

/// Columns: site, target, estimate, stderr.
std::string correlations_order1_csv(const CorrelationTable& table,
                                    const Eigen::VectorXd& target);

/// Columns: site_i, site_j, target, estimate, stderr (i < j).
std::string correlations_order2_csv(const CorrelationTable& table,
                                    const Eigen::MatrixXd& target);

} // namespace dppdyn

#endif
