#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "moss/errors.hpp"
#include "moss/net.hpp"
#include "moss/ops.hpp"
#include "moss/trainer.hpp"

using namespace moss;
using testing::micro_config;
using testing::micro_dialog;
using testing::micro_kb;
using testing::micro_vocab;
using testing::randomize;

namespace {

const char* kInstances[] = {"all", "wo_nlu", "wo_dpl", "wo_nlu_dpl"};

std::vector<double> values(Var<double> v) { return {v.value().begin(), v.value().end()}; }

MossNet<double> random_net(const FrameworkConfig& cfg, std::uint64_t seed) {
  MossNet<double> net(cfg, micro_vocab(), micro_kb());
  randomize(net.params(), seed);
  return net;
}

// Memory of `n` random rows whose copy sources are `ids`.
MossNet<double>::Memory random_memory(Tape<double>& tape, const std::vector<int>& ids, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MossNet<double>::Memory m;
  for (int id : ids) {
    std::vector<double> row(static_cast<std::size_t>(d));
    for (auto& x : row) x = uniform(rng, -1.0, 1.0);
    m.rows.push_back(tape.constant(row, d));
    m.copy_source.push_back(id);
  }
  return m;
}

Var<double> random_h0(Tape<double>& tape, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> h(static_cast<std::size_t>(d));
  for (auto& x : h) x = uniform(rng, -0.5, 0.5);
  return tape.constant(h, d);
}

Dialog two_turn_dialog() {
  Dialog d;
  d.dialog_id = "two";
  d.turns.push_back(testing::micro_turn("a b", "a", "b <sep_req>", "c", "a c"));
  d.turns.push_back(testing::micro_turn("c a", "b", "b <sep_req> c", "a b", "b"));
  return d;
}

}  // namespace

TEST_CASE("encoder") {
  SUBCASE("zero weights and a single PAD give zero states") {
    MossNet<double> net(micro_config(), micro_vocab(), micro_kb());
    for (auto& [name, p] : net.params()) std::fill(p.value.data.begin(), p.value.data.end(), 0.0);
    Tape<double> tape;
    auto enc = net.encode(tape, {tok::pad}, {tok::pad}, {tok::pad});
    for (const auto& seq : {enc.b, enc.r, enc.u})
      for (auto v : seq)
        for (double x : v.value()) CHECK(x == 0.0);
    for (double x : enc.h_E.value()) CHECK(x == 0.0);
  }
  SUBCASE("sequence lengths and hidden size") {
    auto cfg = micro_config();
    cfg.d_emb = 50;
    cfg.d_hid = 50;
    MossNet<float> net(cfg, micro_vocab(), micro_kb());
    Tape<float> tape;
    auto enc = net.encode(tape, {9, 10, 11}, {9, 9, 10, 10}, {11, 10, 9, 10, 11});
    CHECK(enc.b.size() == 3);
    CHECK(enc.r.size() == 4);
    CHECK(enc.u.size() == 5);
    CHECK(enc.h_E.size() == 50);
    for (auto v : enc.u) CHECK(v.size() == 50);
  }
  SUBCASE("tied directions over a palindrome give a palindromic state sequence") {
    auto net = random_net(micro_config(), 21);
    for (auto& [name, p] : net.params()) {
      if (name.rfind("encoder.gru_fwd.", 0) == 0) {
        net.params().get("encoder.gru_bwd." + name.substr(16)).value.data = p.value.data;
      }
    }
    Tape<double> tape;
    auto enc = net.encode(tape, {9, 10}, {11}, {10, 9});
    std::vector<Var<double>> all;
    for (const auto& seq : {enc.b, enc.r, enc.u}) all.insert(all.end(), seq.begin(), seq.end());
    REQUIRE(all.size() == 5);
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(values(all[i]) == values(all[all.size() - 1 - i]));
  }
  SUBCASE("ids outside the vocabulary") {
    MossNet<double> net(micro_config(), micro_vocab(), micro_kb());
    Tape<double> tape;
    CHECK_THROWS_AS(net.encode(tape, {12}, {9}, {9}), ContractError);
    CHECK_THROWS_AS(net.encode(tape, {9}, {-1}, {9}), ContractError);
    CHECK_THROWS_AS(net.encode(tape, {}, {9}, {9}), ContractError);
  }
}

TEST_CASE("copy path for out-of-vocabulary words") {
  const auto cfg = micro_config();
  auto net = random_net(cfg, 3);
  const Vocab& v = net.vocab();
  OovTable oov(v);
  const int zan = oov.add("zanzibar");
  REQUIRE(zan == v.size());
  RunContext ctx;

  Tape<double> tape;
  Var<double> h0 = random_h0(tape, cfg.d_hid, 4);
  const std::vector<int> target{zan, tok::eos_s};

  // Copy available: the OOV word's probability is its copy mass.
  auto with_copy = random_memory(tape, {9, zan, 10}, cfg.d_hid, 5);
  auto r1 = net.decode_module(tape, Module::dst, with_copy, h0, &target, nullptr, oov, ctx);
  const double p_copy = r1.copy_probability(0, zan);
  CHECK(p_copy > 0.0);
  CHECK(r1.distribution(0, oov.size(), v.size())[static_cast<std::size_t>(zan)] == doctest::Approx(p_copy));
  CHECK(r1.step_nll[0].item() == doctest::Approx(-std::log(p_copy)).epsilon(1e-10));

  // No copy source for it: the emission is exactly the UNK generation probability.
  auto without = random_memory(tape, {9, 11, 10}, cfg.d_hid, 5);
  auto r2 = net.decode_module(tape, Module::dst, without, h0, &target, nullptr, oov, ctx);
  CHECK(r2.distribution(0, oov.size(), v.size())[static_cast<std::size_t>(zan)] == 0.0);
  CHECK(r2.step_nll[0].item() == doctest::Approx(-std::log(r2.generation_probability(0, tok::unk))).epsilon(1e-10));
}

TEST_CASE("uniform scores give NLL ln(V + n)") {
  const auto cfg = micro_config();
  MossNet<double> net(cfg, micro_vocab(), micro_kb());
  for (const char* name : {"dst.out.W", "dst.out.b", "dst.copy.W"}) {
    auto& p = net.params().get(name);
    std::fill(p.value.data.begin(), p.value.data.end(), 0.0);
  }
  OovTable oov(net.vocab());
  RunContext ctx;
  Tape<double> tape;
  auto mem = random_memory(tape, {9, 10, 9}, cfg.d_hid, 1);
  const std::vector<int> target{11};  // not among the copy sources
  auto r = net.decode_module(tape, Module::dst, mem, random_h0(tape, cfg.d_hid, 2), &target, nullptr, oov, ctx);
  CHECK(r.step_nll[0].item() == doctest::Approx(std::log(12.0 + 3.0)).epsilon(1e-12));
}

TEST_CASE("every step distribution and attention is normalized") {
  for (const char* inst : kInstances) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto cfg = micro_config(inst);
      auto net = random_net(cfg, seed);
      Tape<double> tape;
      RunContext ctx;
      auto outs = net.run_dialog(tape, two_turn_dialog(), Source::predicted, ctx, false);
      for (const auto& out : outs) {
        for (Module m : cfg.modules()) {
          const auto& d = out.get(m)->decode;
          CHECK(d.tokens.size() == d.hidden.size());
          for (std::size_t s = 0; s < d.tokens.size(); ++s) {
            const auto dist = d.distribution(s, out.oov.size(), net.vocab().size());
            CHECK(std::accumulate(dist.begin(), dist.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
            const auto w = d.attention[s].value();
            CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
            for (double x : dist) CHECK(x >= 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("DPL depends on the match degree") {
  const auto cfg = micro_config();
  auto net = random_net(cfg, 5);
  OovTable oov(net.vocab());
  RunContext ctx;
  Tape<double> tape;
  auto mem = random_memory(tape, {9, 10, 11}, cfg.d_hid, 5);
  auto h0 = random_h0(tape, cfg.d_hid, 5);
  const std::vector<int> target{11, 9, tok::eos_a};
  const auto k1 = MatchDegree::from_count(1);
  const auto k0 = MatchDegree::from_count(0);
  auto r1 = net.decode_module(tape, Module::dpl, mem, h0, &target, &k1, oov, ctx);
  auto r0 = net.decode_module(tape, Module::dpl, mem, h0, &target, &k0, oov, ctx);
  double diff = 0;
  for (std::size_t s = 0; s < target.size(); ++s) {
    auto a = r1.distribution(s, oov.size(), 12), b = r0.distribution(s, oov.size(), 12);
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  CHECK(diff > 1e-6);
  CHECK_THROWS_AS(net.decode_module(tape, Module::dpl, mem, h0, &target, nullptr, oov, ctx), ContractError);
  CHECK_THROWS_AS(net.decode_module(tape, Module::dst, mem, h0, &target, &k1, oov, ctx), ContractError);
  MossNet<double>::Memory empty;
  CHECK_THROWS_AS(net.decode_module(tape, Module::dst, empty, h0, &target, nullptr, oov, ctx), ContractError);
}

TEST_CASE("wiring and hidden-state chaining") {
  for (const char* inst : kInstances) {
    for (bool act_states : {false, true}) {
      CAPTURE(inst);
      auto cfg = micro_config(inst);
      cfg.nlg_attends_act_states = act_states;
      auto net = random_net(cfg, 8);
      Tape<double> tape;
      RunContext ctx;
      auto outs = net.run_dialog(tape, micro_dialog(), Source::gold, ctx, true);
      const auto& out = outs.at(0);
      CHECK(out.wiring == expected_wiring(cfg));
      for (Module m : kAllModules) CHECK((out.get(m) != nullptr) == cfg.has(m));

      Var<double> upstream = out.encoder.h_E;
      for (Module m : cfg.modules()) {
        CHECK(values(out.h0[static_cast<std::size_t>(module_index(m))]) == values(upstream));
        upstream = out.get(m)->decode.last_hidden();
      }
    }
  }
  SUBCASE("the two-decoder instance") {
    auto w = expected_wiring(FrameworkConfig::instance("wo_nlu_dpl"));
    REQUIRE(w.size() == 2);
    CHECK(w[0] == ModuleWiring{Module::dst, {"B~", "R~", "U~"}, "encoder", false});
    CHECK(w[1] == ModuleWiring{Module::nlg, {"R~", "U~", "S~"}, "DST", true});
  }
}

TEST_CASE("parameter partition") {
  for (const char* inst : kInstances) {
    CAPTURE(inst);
    const auto cfg = micro_config(inst);
    const auto store = MossNet<double>::make_parameters(cfg);
    for (const auto& name : store.names()) {
      const std::string owner = name.substr(0, name.find('.'));
      const bool ok = owner == "encoder" || (owner == "nlu" && cfg.has_nlu) || owner == "dst" ||
                      (owner == "dpl" && cfg.has_dpl) || owner == "nlg";
      CHECK_MESSAGE(ok, name);
    }
    CHECK(store.contains("nlg.act.W") == cfg.has_dpl);

    // Every registered parameter is reached by the loss.
    auto net = random_net(cfg, 13);
    Tape<double> tape;
    RunContext ctx;
    auto dl = dialog_loss(net, tape, micro_dialog(), ctx);
    net.params().zero_grad();
    tape.backward(dl.total);
    tape.accumulate_param_grads(net.params());
    for (const auto& [name, p] : net.params()) {
      if (name.ends_with(".b_z") || name.ends_with(".b_r") || name.ends_with(".b_h") || name.ends_with(".b")) continue;
      double norm = 0;
      for (double g : p.grad) norm += g * g;
      CHECK_MESSAGE(norm > 0.0, name);
    }
  }
}

TEST_CASE("teacher for an absent module") {
  auto net = random_net(micro_config("wo_dpl"), 1);
  const auto d = micro_dialog();
  TurnTeacher t;
  t[Module::dst] = &*d.turns[0].s;
  t[Module::dpl] = &*d.turns[0].a;
  Tape<double> tape;
  RunContext ctx;
  CHECK_THROWS_AS(net.forward_turn(tape, make_turn_input(d, 1, Source::gold, nullptr), &t, ctx), ContractError);
}

TEST_CASE("fully teacher-forced turn") {
  auto cfg = micro_config("all");
  auto net = random_net(cfg, 17);
  const auto d = micro_dialog();
  Tape<double> tape;
  RunContext ctx;
  auto outs = net.run_dialog(tape, d, Source::gold, ctx, true);
  REQUIRE(outs.size() == 1);
  for (Module m : kAllModules) {
    REQUIRE(outs[0].get(m) != nullptr);
    CHECK(outs[0].get(m)->teacher_forced);
    CHECK(outs[0].get(m)->words == *d.turns[0].gold(m));
  }
  const auto& s = *outs[0].get(Module::dst);
  double mean = 0;
  for (auto v : s.decode.step_nll) mean += v.item();
  mean /= static_cast<double>(s.decode.step_nll.size());
  CHECK(s.loss.item() == doctest::Approx(mean));
  CHECK(s.decode.step_nll.size() == d.turns[0].s->size() + 1);
  CHECK(*turn_loss(outs[0], d.turns[0], cfg).values[Module::dst] == doctest::Approx(s.loss.item()));
}

TEST_CASE("the act sequence conditions NLG") {
  auto net = random_net(micro_config("all"), 19);
  const auto d = micro_dialog();
  const Tokens dummy{"a", "a", "b"};
  auto nlg_dist = [&](const Tokens& act) {
    Tape<double> tape;
    RunContext ctx;
    TurnTeacher t;
    for (Module m : kAllModules) t[m] = d.turns[0].gold(m);
    t[Module::dpl] = &act;
    auto out = net.forward_turn(tape, make_turn_input(d, 1, Source::gold, nullptr), &t, ctx);
    const auto& r = out.get(Module::nlg)->decode;
    std::vector<double> all;
    for (std::size_t s = 0; s < r.tokens.size(); ++s) {
      auto dist = r.distribution(s, out.oov.size(), 12);
      all.insert(all.end(), dist.begin(), dist.end());
    }
    return all;
  };
  const auto a = nlg_dist(*d.turns[0].a);
  const auto b = nlg_dist(dummy);
  double diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  CHECK(diff > 1e-6);
  CHECK_FALSE(MossNet<double>::make_parameters(micro_config("wo_dpl")).contains("dpl.gru.W_z"));
}

TEST_CASE("run_dialog builds the next B from its source") {
  const auto d = two_turn_dialog();
  for (const char* inst : {"all", "wo_dpl"}) {
    CAPTURE(inst);
    auto cfg = micro_config(inst);
    auto net = random_net(cfg, 23);
    auto b_ids_of_turn2 = [&](Source src, Tokens* expect) {
      Tape<double> tape;
      RunContext ctx;
      auto outs = net.run_dialog(tape, d, src, ctx, false);
      REQUIRE(outs.size() == 2);
      const auto p = outs[0].prediction();
      if (src == Source::predicted) {
        *expect = state_summary(p.s, cfg.has_dpl ? &p.a : nullptr);
      } else {
        *expect = state_summary(*d.turns[0].s, cfg.has_dpl ? &*d.turns[0].a : nullptr);
      }
      // DST memory starts with B~ and its copy sources are B's tokens.
      const auto& src_ids = outs[1].get(Module::dst)->decode.copy_source;
      Tokens b;
      for (std::size_t i = 0; i < outs[1].encoder.b.size(); ++i) b.push_back(outs[1].oov.word(src_ids[i]));
      return b;
    };
    Tokens expect;
    CHECK(b_ids_of_turn2(Source::predicted, &expect) == expect);
    CHECK(b_ids_of_turn2(Source::gold, &expect) == expect);
  }
  SUBCASE("one turn, one output") {
    auto net = random_net(micro_config(), 1);
    Tape<double> tape;
    RunContext ctx;
    CHECK(net.run_dialog(tape, micro_dialog(), Source::gold, ctx, false).size() == 1);
  }
}

TEST_CASE("a token copied more than generated comes from the copy sources") {
  for (const char* inst : kInstances) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto net = random_net(micro_config(inst), seed * 31);
      Tape<double> tape;
      RunContext ctx;
      for (const auto& out : net.run_dialog(tape, two_turn_dialog(), Source::predicted, ctx, false)) {
        for (Module m : net.config().modules()) {
          const auto& d = out.get(m)->decode;
          for (std::size_t s = 0; s < d.tokens.size(); ++s) {
            const int t = d.tokens[s];
            const double gen = t < 12 ? d.generation_probability(s, t) : 0.0;
            if (d.copy_probability(s, t) > gen) {
              CHECK(std::find(d.copy_source.begin(), d.copy_source.end(), t) != d.copy_source.end());
            }
          }
        }
      }
    }
  }
}

TEST_CASE("full-network gradient check") {
  Dialog masked = two_turn_dialog();
  masked.turns[1].mask.dst = false;
  masked.turns[0].mask.nlu = false;
  for (const char* inst : kInstances) {
    CAPTURE(inst);
    auto single = testing::network_grad_check(micro_config(inst), micro_dialog(), 7, 1e-4);
    CHECK_MESSAGE(single.failed == 0, single.worst_name << " " << single.worst);
    auto multi = testing::network_grad_check(micro_config(inst), masked, 9, 1e-4);
    CHECK_MESSAGE(multi.failed == 0, multi.worst_name << " " << multi.worst);
    CHECK(multi.checked > 0);
  }
}

TEST_CASE("framework config") {
  CHECK_THROWS_AS(FrameworkConfig::instance("wo_nlg"), ContractError);
  for (const char* inst : kInstances) {
    auto c = FrameworkConfig::instance(inst);
    CHECK(c.instance_name() == inst);
    auto back = FrameworkConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
  }
  auto bad = micro_config();
  bad.d_hid = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  auto small = micro_config();
  small.vocab_size = 10;
  CHECK_THROWS_AS(MossNet<double>(small, micro_vocab(), micro_kb()), ContractError);
}
