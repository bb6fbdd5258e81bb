#include "supermarket/ph_representation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "supermarket/error.hpp"

namespace supermarket {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidRepresentation, what);
}

}  // namespace

PhRepresentation::PhRepresentation(Eigen::RowVectorXd alpha,
                                   Eigen::MatrixXd subgenerator)
    : alpha_(std::move(alpha)), t_(std::move(subgenerator)) {
  const Eigen::Index m = alpha_.size();
  if (m == 0) invalid("PH order must be at least 1");
  if (t_.rows() != m || t_.cols() != m) {
    std::ostringstream msg;
    msg << "T must be " << m << "x" << m << " to match alpha, got " << t_.rows()
        << "x" << t_.cols();
    invalid(msg.str());
  }
  if (!alpha_.allFinite() || !t_.allFinite()) invalid("PH entries must be finite");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (alpha_(i) < 0.0) invalid("alpha entries must be non-negative");
  }
  if (std::abs(alpha_.sum() - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "alpha must sum to 1, got " << std::setprecision(17) << alpha_.sum();
    invalid(msg.str());
  }
  bool some_exit = false;
  const double scale = t_.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(t_(i, i) < 0.0)) invalid("T diagonal entries must be negative");
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && t_(i, j) < 0.0) invalid("T off-diagonal entries must be non-negative");
    }
    const double row = t_.row(i).sum();
    if (row > 1e-12 * scale) invalid("T row sums must be non-positive");
    if (row < -1e-12 * scale) some_exit = true;
  }
  if (!some_exit) invalid("T must have an absorbing exit from some phase");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(t_);
  if (!lu.isInvertible()) invalid("T must be invertible");
  t0_ = -t_.rowwise().sum();
  for (Eigen::Index i = 0; i < m; ++i) t0_(i) = std::max(0.0, t0_(i));
  const double mu = mean();
  if (!(mu > 0.0) || !std::isfinite(mu)) invalid("PH mean must be finite and positive");
}

PhRepresentation PhRepresentation::erlang(int phases, double rate) {
  if (phases < 1) invalid("Erlang needs at least one phase");
  if (!(rate > 0.0)) invalid("Erlang rate must be positive");
  Eigen::RowVectorXd alpha = Eigen::RowVectorXd::Zero(phases);
  alpha(0) = 1.0;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(phases, phases);
  for (int i = 0; i < phases; ++i) {
    t(i, i) = -rate;
    if (i + 1 < phases) t(i, i + 1) = rate;
  }
  return {alpha, t};
}

PhRepresentation PhRepresentation::exponential(double rate) {
  return erlang(1, rate);
}

double PhRepresentation::mean() const {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(alpha_.size());
  const Eigen::VectorXd x = t_.fullPivLu().solve(ones);
  return -(alpha_ * x)(0);
}

double PhRepresentation::second_moment() const {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(alpha_.size());
  auto lu = t_.fullPivLu();
  const Eigen::VectorXd once = lu.solve(ones);
  return 2.0 * (alpha_ * lu.solve(once))(0);
}

Eigen::MatrixXd PhRepresentation::restart_generator() const {
  return t_ + t0_ * alpha_;
}

bool PhRepresentation::operator==(const PhRepresentation& other) const {
  return alpha_.size() == other.alpha_.size() && alpha_ == other.alpha_ &&
         t_ == other.t_;
}

PhRepresentation parse_ph_text(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream fields(line);
    fields.imbue(std::locale::classic());
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      std::istringstream number(token);
      number.imbue(std::locale::classic());
      double value = 0.0;
      if (!(number >> value) || !number.eof()) {
        std::ostringstream msg;
        msg << "line " << line_no << ": cannot parse '" << token << "' as a number";
        throw Error(ErrorCode::kParseError, msg.str());
      }
      row.push_back(value);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kParseError, "PH text is empty");
  const std::size_t m = rows.front().size();
  if (rows.size() != m + 1) {
    std::ostringstream msg;
    msg << "alpha has " << m << " entries so T needs " << m << " rows, found "
        << rows.size() - 1;
    throw Error(ErrorCode::kParseError, msg.str());
  }
  Eigen::RowVectorXd alpha(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd t(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) alpha(static_cast<Eigen::Index>(j)) = rows[0][j];
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i + 1].size() != m) {
      std::ostringstream msg;
      msg << "row " << i + 1 << " of T has " << rows[i + 1].size()
          << " entries, expected " << m;
      throw Error(ErrorCode::kParseError, msg.str());
    }
    for (std::size_t j = 0; j < m; ++j) {
      t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i + 1][j];
    }
  }
  return {alpha, t};
}

PhRepresentation parse_ph_text(const std::string& text) {
  std::istringstream in(text);
  return parse_ph_text(in);
}

PhRepresentation load_ph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open PH file '" + path + "'");
  return parse_ph_text(in);
}

std::string format_ph_text(const PhRepresentation& rep) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  const int m = rep.order();
  for (int j = 0; j < m; ++j) out << (j ? " " : "") << rep.alpha()(j);
  out << '\n';
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) out << (j ? " " : "") << rep.subgenerator()(i, j);
    out << '\n';
  }
  return out.str();
}

}  // namespace supermarket
