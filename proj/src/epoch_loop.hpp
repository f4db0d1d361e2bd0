#pragma once

#include <chrono>
#include <tuple>

#include "graphfed/trainer.hpp"

namespace graphfed::internal {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Evaluation cadence and early stopping shared by single-machine and
// distributed runs.
struct EpochLoop {
  const TrainConfig& cfg;
  const GlobalEvaluator& evaluator;
  EarlyStopper stopper;
  double last_val = 0.0;
  double last_test = 0.0;

  EpochLoop(const TrainConfig& c, const GlobalEvaluator& e) : cfg(c), evaluator(e), stopper(c.patience) {}

  // Fills the F1 columns; returns true when training should stop.
  bool record(EpochReport& rep, const ModelParams& p) {
    bool stop = false;
    if (rep.epoch % cfg.eval_every == 0 || rep.epoch == cfg.max_epochs) {
      std::tie(last_val, last_test) = evaluator.evaluate(p);
      stop = stopper.observe(rep.epoch, last_val, last_test, p);
    }
    rep.val_f1 = last_val;
    rep.test_f1 = last_test;
    return stop;
  }
};

}  // namespace graphfed::internal
