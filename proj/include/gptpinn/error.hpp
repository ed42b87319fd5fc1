#pragma once

#include <stdexcept>
#include <string>

namespace gptpinn {

/// Base error for everything the library throws. The message is the
/// user-facing text (e.g. "non-finite input", "corrupt archive").
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a training loop produces a non-finite loss.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(long epoch, double last_finite_loss)
      : Error("training diverged at epoch " + std::to_string(epoch)),
        epoch_(epoch),
        last_finite_loss_(last_finite_loss) {}

  long epoch() const noexcept { return epoch_; }
  double last_finite_loss() const noexcept { return last_finite_loss_; }

 private:
  long epoch_;
  double last_finite_loss_;
};

/// Raised by the online coefficient solver when c leaves the finite range.
class OnlineDivergence : public Error {
 public:
  OnlineDivergence(long epoch, double last_finite_delta)
      : Error("online divergence at epoch " + std::to_string(epoch)),
        epoch_(epoch),
        last_finite_delta_(last_finite_delta) {}

  long epoch() const noexcept { return epoch_; }
  double last_finite_delta() const noexcept { return last_finite_delta_; }

 private:
  long epoch_;
  double last_finite_delta_;
};

}  // namespace gptpinn
