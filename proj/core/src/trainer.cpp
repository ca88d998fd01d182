#include "tdlm/trainer.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "tdlm/batching.hpp"
#include "tdlm/ops.hpp"

TDLM_NAMESPACE_BEGIN

namespace {

bool same_double(double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; }

std::string format(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void step(const char* task, std::size_t epoch, std::size_t index, Tensor& loss, std::span<const NamedParam> params,
          const TrainConfig& config, Tape& tape, Adam& adam) {
  const double value = static_cast<double>(loss.item());
  if (!std::isfinite(value)) {
    throw DivergenceError(std::string(task) + " loss is " + format(value) + " at epoch " + std::to_string(epoch) +
                          ", step " + std::to_string(index));
  }
  tape.backward(loss);
  const double norm = clip_grad_norm(params, config.clip_norm);
  if (!std::isfinite(norm)) {
    throw DivergenceError(std::string(task) + " gradient norm is " + format(norm) + " at epoch " +
                          std::to_string(epoch) + ", step " + std::to_string(index));
  }
  adam.step(params);
}

const char* task_name(char code) {
  switch (code) {
    case 'T':
      return "topic model";
    case 'L':
      return "language model";
    default:
      return "classification";
  }
}

}  // namespace

bool EpochMetrics::operator==(const EpochMetrics& other) const {
  const bool acc_equal =
      dev_acc.has_value() == other.dev_acc.has_value() && (!dev_acc || same_double(*dev_acc, *other.dev_acc));
  return epoch == other.epoch && same_double(tm_loss, other.tm_loss) && same_double(lm_loss, other.lm_loss) &&
         same_double(dev_ppl, other.dev_ppl) && acc_equal && schedule == other.schedule;
}

TrainState TrainState::initial(const TrainConfig& config) {
  TrainState state;
  state.adam = Adam({config.l, config.beta1, config.beta2, config.epsilon});
  state.rng = Rng::derive(config.seed, "train");
  return state;
}

std::string interleave_schedule(std::size_t tm_batches, std::size_t lm_batches) {
  std::string out;
  out.reserve(tm_batches + lm_batches);
  std::size_t i = 0, j = 0;
  while (i < tm_batches || j < lm_batches) {
    // Compare (2i + 1) / (2 tm) with (2j + 1) / (2 lm) without division.
    bool take_tm;
    if (i == tm_batches) {
      take_tm = false;
    } else if (j == lm_batches) {
      take_tm = true;
    } else {
      take_tm = (2 * i + 1) * lm_batches <= (2 * j + 1) * tm_batches;
    }
    out.push_back(take_tm ? 'T' : 'L');
    (take_tm ? i : j)++;
  }
  return out;
}

bool classification_follows_joint_batches(const std::string& schedule) {
  const auto first_c = schedule.find('C');
  if (first_c == std::string::npos) return true;
  return schedule.find_first_of("TL", first_c) == std::string::npos;
}

void train(TdlmModel& model, TrainState& state, const Dataset& data, const TrainHooks& hooks) {
  const TrainConfig& config = model.config();
  const auto tm_params = model.tm_parameters();
  const auto lm_params = model.lm_parameters();
  const auto cls_params = model.cls_parameters();
  auto log = [&](const std::string& line) {
    if (hooks.log) hooks.log(line);
  };

  while (state.epoch < config.n_epoch) {
    const std::size_t epoch = state.epoch + 1;
    EpochMetrics metrics;
    metrics.epoch = epoch;

    auto lm_batches = make_lm_batches(data.train, config.n_batch, config.m2, config.m3, &state.rng);
    std::vector<TmBatch> tm_batches;
    if (!model.vanilla()) {
      auto tm = make_tm_batches(data.train, config.n_batch, config.m1, config.m3, state.rng);
      if (tm.skipped_documents > 0) {
        log("epoch " + std::to_string(epoch) + ": " + std::to_string(tm.skipped_documents) +
            " documents without content words skipped by the topic model");
      }
      tm_batches = std::move(tm.batches);
    }
    std::vector<ClassBatch> cls_batches;
    if (model.supervised()) cls_batches = make_class_batches(data.train, config.n_batch, config.m3, &state.rng);

    std::string schedule = interleave_schedule(tm_batches.size(), lm_batches.size());
    schedule.append(cls_batches.size(), 'C');

    double tm_total = 0.0, lm_total = 0.0;
    std::size_t lm_tokens = 0;
    std::size_t ti = 0, li = 0, ci = 0;
    for (std::size_t s = 0; s < schedule.size(); ++s) {
      Tape tape;
      try {
        if (schedule[s] == 'T') {
          Tensor loss;
          {
            TapeScope scope(tape);
            loss = model.tm_loss(tm_batches[ti++], true, state.rng);
          }
          tm_total += static_cast<double>(loss.item());
          step("topic model", epoch, s + 1, loss, tm_params, config, tape, state.adam);
        } else if (schedule[s] == 'L') {
          Tensor loss;
          std::size_t tokens = 0;
          {
            TapeScope scope(tape);
            auto out = model.lm_loss(lm_batches[li++], true, state.rng);
            tokens = out.tokens;
            loss = scale(out.total, static_cast<Real>(1.0 / static_cast<double>(tokens)));
          }
          lm_total += static_cast<double>(loss.item()) * static_cast<double>(tokens);
          lm_tokens += tokens;
          step("language model", epoch, s + 1, loss, lm_params, config, tape, state.adam);
        } else {
          Tensor loss;
          {
            TapeScope scope(tape);
            loss = model.cls_loss(cls_batches[ci++], true, state.rng);
          }
          step("classification", epoch, s + 1, loss, cls_params, config, tape, state.adam);
        }
      } catch (const NumericError& e) {
        throw DivergenceError(std::string(task_name(schedule[s])) + " diverged at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(s + 1) + ": " + e.what());
      }
    }

    if (!tm_batches.empty()) metrics.tm_loss = tm_total / static_cast<double>(tm_batches.size());
    metrics.lm_loss = lm_tokens > 0 ? lm_total / static_cast<double>(lm_tokens) : 0.0;
    metrics.dev_ppl = model.perplexity(data.dev).value;
    if (model.supervised()) metrics.dev_acc = model.accuracy(data.dev);
    metrics.schedule = std::move(schedule);

    const bool improved = metrics.dev_ppl < state.best_dev_ppl;
    if (improved) {
      state.best_dev_ppl = metrics.dev_ppl;
      state.best_epoch = epoch;
    }
    std::ostringstream line;
    line << "epoch " << epoch << ": tm_loss " << format(metrics.tm_loss) << ", lm_loss " << format(metrics.lm_loss)
         << ", dev_ppl " << format(metrics.dev_ppl);
    if (metrics.dev_acc) line << ", dev_acc " << format(*metrics.dev_acc);
    line << " (" << tm_batches.size() << " T, " << lm_batches.size() << " L, " << cls_batches.size() << " C)";
    state.history.push_back(std::move(metrics));
    state.epoch = epoch;
    state.adam.set_learning_rate(state.adam.config().learning_rate * config.lr_decay);
    log(line.str());
    if (hooks.on_epoch) hooks.on_epoch(model, state, improved);
  }
}

std::string metrics_csv(const std::vector<EpochMetrics>& history) {
  bool with_acc = false;
  for (const auto& m : history) with_acc = with_acc || m.dev_acc.has_value();
  std::string out = with_acc ? "epoch,tm_loss,lm_loss,dev_ppl,dev_acc\n" : "epoch,tm_loss,lm_loss,dev_ppl\n";
  for (const auto& m : history) {
    out += std::to_string(m.epoch) + ',' + format(m.tm_loss) + ',' + format(m.lm_loss) + ',' + format(m.dev_ppl);
    if (with_acc) out += ',' + (m.dev_acc ? format(*m.dev_acc) : std::string("nan"));
    out += '\n';
  }
  return out;
}

TDLM_NAMESPACE_END
