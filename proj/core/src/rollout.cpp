#include "moss/rollout.hpp"

#include "moss/errors.hpp"

namespace moss {

TurnPrediction predict_turn(const MossNet<float>& net, const TurnInput& input) {
  if (input.gold_context) throw ContractError("rollout: turn input was built from gold annotations");
  Tape<float> tape;
  tape.set_grad_enabled(false);
  RunContext ctx;
  const TurnOutput<float> out = net.forward_turn(tape, input, nullptr, ctx);
  TurnPrediction p;
  for (Module m : kAllModules)
    if (const auto* mo = out.get(m)) p[m] = mo->words;
  return p;
}

DialogPrediction predict_dialog(const MossNet<float>& net, const Dialog& dialog) {
  DialogPrediction out;
  out.dialog_id = dialog.dialog_id;
  PredictedTurn prev;
  for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
    const TurnInput input = make_turn_input(dialog, static_cast<int>(t + 1), Source::predicted, t > 0 ? &prev : nullptr,
                                            net.config().has_dpl);
    TurnPrediction p = predict_turn(net, input);
    prev = PredictedTurn{p[Module::dst].value_or(Tokens{}), p[Module::dpl].value_or(Tokens{}),
                         p[Module::nlg].value_or(Tokens{})};
    out.turns.push_back(std::move(p));
  }
  return out;
}

Predictions predict(const MossNet<float>& net, const Corpus& corpus) {
  Predictions out;
  out.reserve(corpus.size());
  for (const auto& d : corpus) out.push_back(predict_dialog(net, d));
  return out;
}

}  // namespace moss
