#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "semmatch/hmm_model.hpp"

namespace semmatch {

/// Sliding-window Viterbi decoder over log scores.
///
/// The window holds at most `window` steps. When a step is appended to a full
/// window the oldest step is evicted: its state on the current best path is
/// committed, the priors of the new first step are propagated through the
/// evicted step's transitions (update_log_priors), and the window is
/// re-decoded from those priors. Committed states never change afterwards.
///
/// Ties are broken toward the lowest state index, both for back-pointers and
/// for the final argmax, so the decoded path is the best path that is
/// smallest when compared from the last step backwards.
class OnlineViterbi {
 public:
  struct Commit {
    std::size_t step = 0;   ///< global index of the step (0-based, counts every pushed step)
    std::size_t state = 0;  ///< index into that step's candidate list
  };

  explicit OnlineViterbi(std::size_t window);

  /// Begins a new chain. Any steps still in the window are committed first.
  std::vector<Commit> start(std::vector<double> log_priors, std::vector<double> log_obs);

  /// Appends a step whose transitions come from the last step in the window.
  /// Returns nullopt, leaving the decoder unchanged, when no state of the new
  /// step has a finite score.
  std::optional<std::vector<Commit>> extend(LogMatrix log_trans, std::vector<double> log_obs);

  /// Commits every step left in the window.
  std::vector<Commit> flush();

  /// Best state sequence over the current window (candidate indices).
  std::vector<std::size_t> window_path() const;

  /// Score of the best path through the window.
  double best_score() const;

  bool empty() const noexcept { return steps_.empty(); }
  std::size_t size() const noexcept { return steps_.size(); }
  std::size_t steps_pushed() const noexcept { return next_step_; }
  std::size_t prior_fallbacks() const noexcept { return prior_fallbacks_; }

 private:
  struct Step {
    std::size_t index = 0;
    std::vector<double> log_obs;
    LogMatrix log_trans;  // from the preceding step; unused for the chain head
    std::vector<double> delta;
    std::vector<std::size_t> back;
  };

  static void advance(const Step& prev, Step& cur);
  void redecode();
  std::size_t argmax_last() const;
  std::vector<Commit> evict_front();

  std::size_t window_;
  std::size_t next_step_ = 0;
  std::size_t prior_fallbacks_ = 0;
  std::vector<double> front_priors_;
  std::deque<Step> steps_;
};

}  // namespace semmatch
