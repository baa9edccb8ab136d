#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace atomscf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Configuration rejected during validation; carries the offending field name.
class invalid_config_error : public std::runtime_error {
  public:
    invalid_config_error(std::string field, const std::string& what)
        : std::runtime_error("invalid config field '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

/// Spectral windows overlap, or an eigenvalue count inside a window does not
/// match the shell-prescribed count.
class gap_violation_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A density state without filled m-subshell structure was passed to a
/// rotation-invariant operator.
class symmetry_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class convergence_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace atomscf
