#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "moss/errors.hpp"
#include "moss/metrics.hpp"
#include "moss/synth.hpp"

using namespace moss;
namespace fs = std::filesystem;

namespace {

Corpus make(const std::string& task, int n, std::uint64_t seed = 1, std::array<double, 4> drop = {0, 0, 0, 0}) {
  const auto schema = TaskSchema::by_name(task);
  GenConfig g;
  g.task = task;
  g.n_dialogs = n;
  g.seed = seed;
  g.annotation_dropout = drop;
  return generate(schema, make_kb(schema, seed), g);
}

std::string dump(const Corpus& c) {
  std::string out;
  for (const auto& d : c) out += dialog_to_json_line(d) + "\n";
  return out;
}

Corpus numbered(int n) {
  Corpus c;
  for (int i = 0; i < n; ++i) {
    Dialog d;
    d.dialog_id = "n" + std::to_string(i);
    d.turns.push_back(testing::micro_turn("a", "a", "a <sep_req>", "a", "a"));
    c.push_back(d);
  }
  return c;
}

std::set<std::string> ids(const Corpus& c) {
  std::set<std::string> s;
  for (const auto& d : c) s.insert(d.dialog_id);
  return s;
}

}  // namespace

TEST_CASE("schemas") {
  for (const char* task : {"simple", "complex"}) {
    const auto s = TaskSchema::by_name(task);
    CHECK_NOTHROW(s.validate());
    CHECK(TaskSchema::from_json(s.to_json()).to_json() == s.to_json());
    for (const auto& sol : s.solution_acts)
      CHECK(std::find(s.system_acts.begin(), s.system_acts.end(), sol) != s.system_acts.end());
    s.save(fs::path(MOSS_SCRATCH_DIR) / (std::string(task) + "_schema.json"));
    CHECK(TaskSchema::load(fs::path(MOSS_SCRATCH_DIR) / (std::string(task) + "_schema.json")).to_json() == s.to_json());
  }
  const auto c = TaskSchema::complex();
  CHECK(c.system_acts.size() == 12);
  CHECK(c.solution_acts.size() == 4);
  const auto s = TaskSchema::simple();
  CHECK(s.informable.size() == 3);
  CHECK(s.requestable.size() == 4);
  for (const auto& slot : s.informable) {
    CHECK(slot.values.size() >= 4);
    CHECK(slot.values.size() <= 6);
  }
  CHECK(make_kb(s, 1).entities.size() == 30);
  auto bad = s;
  bad.informable[0].values.clear();
  CHECK_THROWS_AS(bad.validate(), ContractError);
  CHECK_THROWS_AS(TaskSchema::by_name("medium"), ContractError);
}

TEST_CASE("generation is deterministic") {
  for (const char* task : {"simple", "complex"}) {
    CHECK(dump(make(task, 30, 5, {0.2, 0.2, 0.2, 0})) == dump(make(task, 30, 5, {0.2, 0.2, 0.2, 0})));
    CHECK(dump(make(task, 30, 5)) != dump(make(task, 30, 6)));
  }
}

TEST_CASE("annotation dropout") {
  SUBCASE("zero dropout keeps every mask") {
    for (const auto& d : make("simple", 50))
      for (const auto& t : d.turns) CHECK(t.mask == AnnotationMask{});
  }
  SUBCASE("whole modules are masked per dialog") {
    const auto c = make("simple", 200, 3, {0.5, 0.5, 0.5, 0});
    int masked_dialogs = 0;
    for (const auto& d : c) {
      for (const auto& t : d.turns) {
        CHECK(t.mask == d.turns[0].mask);
        CHECK(t.mask.nlg);
        for (Module m : kAllModules) CHECK(t.field(m).has_value() == t.mask[m]);
      }
      if (!d.turns[0].mask.dst) ++masked_dialogs;
    }
    CHECK(masked_dialogs > 60);
    CHECK(masked_dialogs < 140);
  }
  SUBCASE("bad probabilities") {
    GenConfig g;
    g.annotation_dropout = {1.5, 0, 0, 0};
    CHECK_THROWS_AS(g.validate(), ContractError);
    g.annotation_dropout = {0, 0, 0, 0};
    g.n_dialogs = 0;
    CHECK_THROWS_AS(g.validate(), ContractError);
  }
}

TEST_CASE("annotations agree with each other") {
  for (const char* task : {"simple", "complex"}) {
    CAPTURE(task);
    const auto schema = TaskSchema::by_name(task);
    const auto kb = make_kb(schema, 2);
    GenConfig g;
    g.task = task;
    g.n_dialogs = 200;
    g.seed = 2;
    for (const auto& d : generate(schema, kb, g)) {
      std::map<std::string, std::string> known;
      std::set<std::string> requested;
      for (const auto& t : d.turns) {
        const Tokens& m = *t.m;
        for (std::size_t i = 1; i < m.size(); ++i) {
          if (m[0] == "inform") known[schema.slot_of_value(m[i])] = m[i];
          if (m[0] == "request") requested.insert(m[i]);
        }
        // S is the fold of M so far.
        Tokens s;
        for (const auto& slot : schema.informable)
          if (known.count(slot.name)) s.push_back(known[slot.name]);
        s.push_back("<sep_req>");
        s.insert(s.end(), requested.begin(), requested.end());
        CHECK(*t.s == s);
        // A is the policy's act, and R realizes it.
        CHECK(policy_act(schema, kb, *t.s, m) == *t.a);
        CHECK(invert_response(schema, *t.resp) == *t.a);
        // Replaying S through the KB yields entities that satisfy the goal
        // whenever an offer is made.
        if (t.a->front() == "offer") {
          auto r = query(kb, state_to_query(*t.s, kb));
          REQUIRE_FALSE(r.matches.empty());
          for (auto i : r.matches)
            for (const auto& [slot, value] : d.goal->constraints) CHECK(kb.entities[i].at(slot) == value);
        }
      }
    }
  }
}

TEST_CASE("simple-task goals are reached") {
  const auto schema = TaskSchema::simple();
  const auto c = make("simple", 400, 7);
  int reached = 0;
  for (const auto& d : c) {
    Corpus one{d};
    if (*success_f1(gold_predictions(one), one, schema.requestable) == 1.0 && *entity_match_rate(gold_predictions(one), one) == 1.0)
      ++reached;
  }
  CHECK(static_cast<double>(reached) / static_cast<double>(c.size()) >= 0.99);
}

TEST_CASE("complex-task dialogs contain exactly one solution") {
  const auto schema = TaskSchema::complex();
  for (const auto& d : make("complex", 300, 4)) {
    int n = 0;
    for (const auto& t : d.turns) {
      if (schema.is_solution(t.a->front())) {
        ++n;
        CHECK(t.a->front() == *d.goal->solution);
      }
    }
    CHECK(n == 1);
  }
  std::map<std::string, std::string> v{{"symptom", "slow"}, {"conn_type", "wifi"}, {"os_type", "mac"},
                                       {"led_state", "light_on"}, {"ping_result", "ping_ok"}};
  CHECK(complex_solution(v) == "sol_restart_router");
  v.erase("symptom");
  CHECK_THROWS_AS(complex_solution(v), ContractError);
}

TEST_CASE("invert_response") {
  const auto schema = TaskSchema::simple();
  CHECK(invert_response(schema, tokenize("nothing to see")).empty());
  const auto c = TaskSchema::complex();
  CHECK(invert_response(c, tokenize("goodbye .")) == Tokens{"bye"});
}

TEST_CASE("split") {
  const auto c = numbered(5);
  auto s = split(c, {3, 1, 1}, 1);
  CHECK(s.train.size() == 3);
  CHECK(s.valid.size() == 1);
  CHECK(s.test.size() == 1);
  CHECK_THROWS_AS(split(c, {1, 0, 0}, 1), ContractError);
  CHECK_THROWS_AS(split(numbered(2), {3, 1, 1}, 1), ContractError);
  auto again = split(c, {3, 1, 1}, 1);
  CHECK(ids(again.train) == ids(s.train));
  CHECK(ids(again.test) == ids(s.test));

  for (int n : {3, 7, 50, 101}) {
    const auto big = numbered(n);
    auto p = split(big, {3, 1, 1}, 9);
    CHECK(p.train.size() + p.valid.size() + p.test.size() == static_cast<std::size_t>(n));
    auto all = ids(p.train);
    for (const auto& id : ids(p.valid)) CHECK(all.insert(id).second);
    for (const auto& id : ids(p.test)) CHECK(all.insert(id).second);
    CHECK(all == ids(big));
    CHECK(std::abs(static_cast<double>(p.train.size()) - 0.6 * n) <= 1.0);
    CHECK(std::abs(static_cast<double>(p.valid.size()) - 0.2 * n) <= 1.0);
  }
}

TEST_CASE("subsample") {
  const auto c = numbered(10);
  auto full = subsample(c, 1.0, 3);
  CHECK(ids(full.sample) == ids(c));
  CHECK(full.complement.empty());
  auto part = subsample(c, 0.6, 3);
  CHECK(part.sample.size() == 6);
  CHECK(part.complement.size() == 4);
  auto all = ids(part.sample);
  for (const auto& id : ids(part.complement)) CHECK(all.insert(id).second);
  CHECK(all == ids(c));
  CHECK(ids(subsample(c, 0.6, 3).sample) == ids(part.sample));
  CHECK_THROWS_AS(subsample(c, 0.0, 1), ContractError);
  CHECK_THROWS_AS(subsample(c, 1.2, 1), ContractError);
  // The input order is kept.
  CHECK(std::is_sorted(part.sample.begin(), part.sample.end(),
                       [](const Dialog& a, const Dialog& b) { return std::stoi(a.dialog_id.substr(1)) < std::stoi(b.dialog_id.substr(1)); }));
}

TEST_CASE("strip_to_raw keeps only the response") {
  const auto d = strip_to_raw(make("simple", 1)[0]);
  for (const auto& t : d.turns) {
    CHECK(t.mask == AnnotationMask{false, false, false, true});
    CHECK_FALSE(t.m);
    CHECK_FALSE(t.s);
    CHECK_FALSE(t.a);
    CHECK(t.resp);
    CHECK_FALSE(t.user.empty());
  }
}

TEST_CASE("generation preconditions") {
  const auto schema = TaskSchema::simple();
  GenConfig g;
  g.task = "complex";
  CHECK_THROWS_AS(generate(schema, make_kb(schema, 1), g), ContractError);
  g.task = "simple";
  KnowledgeBase empty = make_kb(schema, 1);
  empty.entities.clear();
  CHECK_THROWS_AS(generate(schema, empty, g), ContractError);
}
