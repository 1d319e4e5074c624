#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "moss/corpus.hpp"
#include "moss/errors.hpp"
#include "moss/synth.hpp"
#include "moss/vocab.hpp"

using namespace moss;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) { return fs::path(MOSS_SCRATCH_DIR) / name; }

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kFullLine =
    R"({"dialog_id":"d1","goal":{"constraints":{"food":"thai"},"requests":["phone"],"solution":null},)"
    R"("turns":[{"user":"thai food please","m":"inform thai","s":"thai <sep_req> phone","a":"offer name",)"
    R"("resp":"i recommend <name> .","mask":{"nlu":true,"dst":true,"dpl":true,"nlg":true}}]})";

Dialog two_turns() {
  Dialog d;
  d.dialog_id = "two";
  d.turns.push_back(testing::micro_turn("i want thai", "inform thai", "thai <sep_req>", "request area", "what area ?"));
  d.turns.push_back(testing::micro_turn("west please", "inform west", "thai west <sep_req>", "offer name", "try <name> ."));
  return d;
}

}  // namespace

TEST_CASE("load_corpus") {
  SUBCASE("empty file") {
    write(scratch("empty.jsonl"), "");
    CHECK(load_corpus(scratch("empty.jsonl")).empty());
  }
  SUBCASE("one fully annotated dialog") {
    write(scratch("one.jsonl"), std::string(kFullLine) + "\n");
    auto c = load_corpus(scratch("one.jsonl"));
    REQUIRE(c.size() == 1);
    const auto& t = c[0].turns[0];
    CHECK(t.mask == AnnotationMask{true, true, true, true});
    CHECK(*t.s == Tokens{"thai", "<sep_req>", "phone"});
    CHECK(c[0].goal->constraints.at("food") == "thai");
  }
  SUBCASE("absent field under a true mask names line and field") {
    std::string bad = kFullLine;
    bad.replace(bad.find(R"("m":"inform thai",)"), std::string(R"("m":"inform thai",)").size(), "");
    write(scratch("bad.jsonl"), std::string(kFullLine) + "\n" + bad + "\n");
    try {
      load_corpus(scratch("bad.jsonl"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 2") != std::string::npos);
      CHECK(msg.find("'m'") != std::string::npos);
    }
  }
  SUBCASE("malformed JSON") {
    write(scratch("garbage.jsonl"), "{not json\n");
    CHECK_THROWS_AS(load_corpus(scratch("garbage.jsonl")), ParseError);
  }
  SUBCASE("duplicate constraint tokens violate the state invariant") {
    std::string dup = kFullLine;
    dup.replace(dup.find("thai <sep_req>"), 14, "thai thai <sep_req>");
    write(scratch("dup.jsonl"), dup + "\n");
    CHECK_THROWS_AS(load_corpus(scratch("dup.jsonl")), ParseError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_corpus(scratch("nope.jsonl")), ParseError); }
}

TEST_CASE("masked fields may be absent") {
  std::string line = kFullLine;
  line.replace(line.find(R"("m":"inform thai")"), std::string(R"("m":"inform thai")").size(), R"("m":null)");
  line.replace(line.find(R"("nlu":true)"), 10, R"("nlu":false)");
  Dialog d = dialog_from_json_line(line, 1);
  CHECK_FALSE(d.turns[0].m.has_value());
  CHECK(d.turns[0].gold(Module::nlu) == nullptr);
  CHECK(d.turns[0].gold(Module::dst) != nullptr);
}

TEST_CASE("canonical corpus files round-trip byte for byte") {
  const auto schema = TaskSchema::simple();
  GenConfig g;
  g.n_dialogs = 25;
  g.annotation_dropout = {0.3, 0.2, 0.3, 0.1};
  const Corpus c = generate(schema, make_kb(schema, 1), g);
  save_corpus(c, scratch("rt1.jsonl"));
  save_corpus(load_corpus(scratch("rt1.jsonl")), scratch("rt2.jsonl"));
  CHECK(slurp(scratch("rt1.jsonl")) == slurp(scratch("rt2.jsonl")));
}

TEST_CASE("vocabulary construction") {
  Dialog d;
  d.dialog_id = "v";
  d.turns.push_back(testing::micro_turn("b a b", "c", "a <sep_req>", "b", "a"));

  SUBCASE("three distinct words") {
    Vocab v = Vocab::build({d}, 800);
    CHECK(v.size() == 3 + tok::num_reserved);
    // counts: a 3, b 3, c 1; the tie goes to the lexicographically smaller token
    CHECK(v.encode("a") == tok::num_reserved);
    CHECK(v.encode("b") == tok::num_reserved + 1);
    CHECK(v.encode("c") == tok::num_reserved + 2);
  }
  SUBCASE("reserved ids") {
    Vocab v;
    CHECK(v.encode("<pad>") == tok::pad);
    CHECK(v.encode("<unk>") == tok::unk);
    CHECK(v.encode("<eos_m>") == tok::eos_m);
    CHECK(v.encode("<eos_s>") == tok::eos_s);
    CHECK(v.encode("<eos_a>") == tok::eos_a);
    CHECK(v.encode("<eos_r>") == tok::eos_r);
    CHECK(v.encode("<sep_inf>") == tok::sep_inf);
    CHECK(v.encode("<sep_req>") == tok::sep_req);
    CHECK(v.encode("<go>") == tok::go);
  }
  SUBCASE("limit truncates to exactly the limit") {
    Dialog big;
    big.dialog_id = "big";
    DialogTurn t;
    for (int i = 0; i < 1000; ++i) t.user.push_back("w" + std::to_string(i));
    t.mask = AnnotationMask{false, false, false, false};
    big.turns.push_back(t);
    CHECK(Vocab::build({big}, 800).size() == 800);
    CHECK(Vocab::build({big}, 20).size() == 20);
    CHECK_THROWS_AS(Vocab::build({big}, 5), ContractError);
  }
  SUBCASE("masked fields still count") {
    Dialog m = d;
    m.turns[0].m = Tokens{"zeta"};
    m.turns[0].mask.nlu = false;
    CHECK(Vocab::build({m}, 800).contains("zeta"));
  }
  SUBCASE("save and load keep ids; OOV encodes to UNK") {
    Vocab v = Vocab::build({d}, 800);
    v.save(scratch("vocab.txt"));
    Vocab back = Vocab::load(scratch("vocab.txt"));
    CHECK(back.tokens() == v.tokens());
    for (int id = 0; id < v.size(); ++id) CHECK(back.encode(back.decode(id)) == id);
    CHECK(back.encode("never-seen") == tok::unk);
  }
}

TEST_CASE("make_turn_input") {
  const Dialog d = two_turns();
  SUBCASE("first turn uses the sentinels") {
    auto in = make_turn_input(d, 1, Source::gold, nullptr);
    CHECK(in.b_prev == Tokens{"<go>"});
    CHECK(in.r_prev == Tokens{"<go>"});
    CHECK(in.u == Tokens{"i", "want", "thai"});
    CHECK_FALSE(in.gold_context);
  }
  SUBCASE("gold source concatenates gold S and A") {
    auto in = make_turn_input(d, 2, Source::gold, nullptr);
    CHECK(in.b_prev == Tokens{"thai", "<sep_req>", "<eos_s>", "request", "area", "<eos_a>"});
    CHECK(in.r_prev == Tokens{"what", "area", "?"});
    CHECK(in.gold_context);
  }
  SUBCASE("predicted source uses the model's outputs even when wrong") {
    PredictedTurn p{{"chinese", "<sep_req>"}, {"offer", "name"}, {"sorry", "."}};
    auto in = make_turn_input(d, 2, Source::predicted, &p);
    CHECK(in.b_prev == Tokens{"chinese", "<sep_req>", "<eos_s>", "offer", "name", "<eos_a>"});
    CHECK(in.r_prev == Tokens{"sorry", "."});
    CHECK_FALSE(in.gold_context);
  }
  SUBCASE("without DPL the summary carries S only") {
    auto in = make_turn_input(d, 2, Source::gold, nullptr, false);
    CHECK(in.b_prev == Tokens{"thai", "<sep_req>", "<eos_s>"});
  }
  SUBCASE("masked gold falls back to predictions") {
    Dialog m = d;
    m.turns[0].mask.dst = false;
    PredictedTurn p{{"x", "<sep_req>"}, {"y"}, {"z"}};
    auto in = make_turn_input(m, 2, Source::gold, &p);
    CHECK(in.b_prev == Tokens{"x", "<sep_req>", "<eos_s>", "request", "area", "<eos_a>"});
    CHECK_THROWS_AS(make_turn_input(m, 2, Source::gold, nullptr), ContractError);
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(make_turn_input(d, 0, Source::gold, nullptr), IndexError);
    CHECK_THROWS_AS(make_turn_input(d, 3, Source::gold, nullptr), IndexError);
  }
}

TEST_CASE("B chain over generated dialogs equals the stored summaries") {
  for (const char* task : {"simple", "complex"}) {
    const auto schema = TaskSchema::by_name(task);
    GenConfig g;
    g.task = task;
    g.n_dialogs = 40;
    const Corpus c = generate(schema, make_kb(schema, 3), g);
    for (const auto& d : c) {
      for (std::size_t t = 1; t < d.turns.size(); ++t) {
        const auto in = make_turn_input(d, static_cast<int>(t + 1), Source::gold, nullptr);
        CHECK(in.b_prev == state_summary(*d.turns[t - 1].s, &*d.turns[t - 1].a));
      }
    }
  }
}

TEST_CASE("state helpers") {
  auto p = split_state({"thai", "west", "<sep_req>", "address", "phone"});
  CHECK(p.constraints == Tokens{"thai", "west"});
  CHECK(p.requests == Tokens{"address", "phone"});
  CHECK(split_state({"thai", "<eos_s>", "junk"}).constraints == Tokens{"thai"});
  CHECK(state_summary({"a"}, nullptr) == Tokens{"a", "<eos_s>"});
  CHECK(tokenize("  a  b\tc \n") == Tokens{"a", "b", "c"});
  CHECK(join({"a", "b"}) == "a b");
}
