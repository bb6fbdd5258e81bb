#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace supermarket {

/// Phase-type representation (alpha, T) of order m. Construction validates:
/// alpha is a probability vector, T is a subgenerator (negative diagonal,
/// non-negative off-diagonal, row sums <= 0 with at least one strict), T is
/// invertible and the mean -alpha T^{-1} e is finite and positive.
class PhRepresentation {
 public:
  PhRepresentation(Eigen::RowVectorXd alpha, Eigen::MatrixXd subgenerator);

  /// Erlang-m chain with per-phase rate eta, alpha = (1, 0, ..., 0).
  static PhRepresentation erlang(int phases, double rate);
  static PhRepresentation exponential(double rate);

  const Eigen::RowVectorXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& subgenerator() const { return t_; }
  /// T0 = -T e.
  const Eigen::VectorXd& exit_rates() const { return t0_; }
  int order() const { return static_cast<int>(alpha_.size()); }

  double mean() const;
  double second_moment() const;
  /// mu = -1 / (alpha T^{-1} e).
  double service_rate() const { return 1.0 / mean(); }

  /// T + T0 alpha, the generator of the phase process with instant restarts.
  Eigen::MatrixXd restart_generator() const;

  bool operator==(const PhRepresentation& other) const;

 private:
  Eigen::RowVectorXd alpha_;
  Eigen::MatrixXd t_;
  Eigen::VectorXd t0_;
};

// Text format: first non-comment line holds the alpha entries; the next m
// lines hold the rows of T. Entries are separated by whitespace or commas and
// '#' starts a comment.
PhRepresentation parse_ph_text(std::istream& in);
PhRepresentation parse_ph_text(const std::string& text);
PhRepresentation load_ph_file(const std::string& path);

std::string format_ph_text(const PhRepresentation& rep);

}  // namespace supermarket
