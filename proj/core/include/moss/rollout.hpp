#pragma once

#include "moss/metrics.hpp"
#include "moss/net.hpp"

namespace moss {

// Greedy rollout of one dialog on the model's own outputs: B and R of each
// turn come from the previous turn's predictions, never from gold.
// ContractError if a turn input is ever built from gold context.
DialogPrediction predict_dialog(const MossNet<float>& net, const Dialog& dialog);

Predictions predict(const MossNet<float>& net, const Corpus& corpus);

// One live turn (chat): decodes all modules of the instance for `input`.
TurnPrediction predict_turn(const MossNet<float>& net, const TurnInput& input);

}  // namespace moss
