#ifndef TDLM_TRAINER_HPP_
#define TDLM_TRAINER_HPP_

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tdlm/model.hpp"
#include "tdlm/optim.hpp"
#include "tdlm/random.hpp"

TDLM_NAMESPACE_BEGIN

struct EpochMetrics {
  std::size_t epoch = 0;                                      // 1-based
  double tm_loss = std::numeric_limits<double>::quiet_NaN();  // mean over TM batches; NaN when vanilla
  double lm_loss = 0.0;                                       // per-token mean over the epoch
  double dev_ppl = 0.0;
  std::optional<double> dev_acc;
  // One letter per minibatch in processing order: T topic model,
  // L language model, C classification.
  std::string schedule;

  bool operator==(const EpochMetrics& other) const;
};

/// Everything besides the parameters that a resumed run needs to continue
/// exactly where an uninterrupted run would be.
struct TrainState {
  std::size_t epoch = 0;  // completed epochs
  Adam adam;
  Rng rng;
  double best_dev_ppl = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::vector<EpochMetrics> history;

  static TrainState initial(const TrainConfig& config);
};

struct TrainHooks {
  // Called after each epoch; `improved` is true when dev perplexity is the
  // best seen so far.
  std::function<void(const TdlmModel&, const TrainState&, bool improved)> on_epoch;
  std::function<void(const std::string&)> log;
};

// Orders TM and LM minibatches by proportional round-robin: batch j of a
// stream of n batches sits at position (j + 1/2) / n; ties go to the TM batch.
std::string interleave_schedule(std::size_t tm_batches, std::size_t lm_batches);

// True when every C in the schedule comes after all T and L entries.
bool classification_follows_joint_batches(const std::string& schedule);

// Trains from state.epoch up to config.n_epoch. Every minibatch is followed
// by one Adam step on that sub-task's parameters. DivergenceError names the
// sub-task and step when a loss or gradient becomes non-finite.
void train(TdlmModel& model, TrainState& state, const Dataset& data, const TrainHooks& hooks = {});

// `epoch,tm_loss,lm_loss,dev_ppl[,dev_acc]`; the accuracy column appears
// when any epoch has one.
std::string metrics_csv(const std::vector<EpochMetrics>& history);

TDLM_NAMESPACE_END

#endif  // TDLM_TRAINER_HPP_
