#include <doctest.h>

#include <set>

#include "dr/error.hpp"
#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/parallel.hpp"
#include "dr/random.hpp"
#include "dr/rubric.hpp"
#include "dr/text.hpp"
#include "dr/time.hpp"
#include "test_support.hpp"

using namespace dr;

TEST_SUITE("common") {
  TEST_CASE("utf8 decode and encode round-trip") {
    const std::string s = "a\xC3\xA9\xE4\xB8\xAD\xF0\x9F\x98\x80";
    const auto cps = text::decode_utf8(s);
    REQUIRE(cps.size() == 4);
    CHECK(cps[1] == 0xE9);
    CHECK(cps[2] == 0x4E2D);
    CHECK(cps[3] == 0x1F600);
    CHECK(text::encode_utf8(cps) == s);
    CHECK(text::code_point_count(s) == 4);
    CHECK(text::utf8_prefix(s, 2) == "a\xC3\xA9");
  }

  TEST_CASE("invalid utf8 bytes become replacement characters") {
    const auto cps = text::decode_utf8("\xFF" "a");
    REQUIRE(cps.size() == 2);
    CHECK(cps[0] == 0xFFFD);
  }

  TEST_CASE("case folding and tokenization") {
    CHECK(text::fold_case("HeLLo \xC3\x89T\xC3\x89") == "hello \xC3\xA9t\xC3\xA9");
    const auto toks = text::tokenize("Hello, World! \xE4\xB8\xAD\xE6\x96\x87 x_1");
    CHECK(toks == std::vector<std::string>{"hello", "world", "\xE4\xB8\xAD", "\xE6\x96\x87", "x_1"});
    CHECK(text::normalize_answer("  The  ANSWER: Paris! ") == "the answer paris");
    CHECK(text::collapse_whitespace("  a \n\t b  ") == "a b");
    CHECK(text::trim("\n x \t") == "x");
    CHECK(text::approx_tokens("abcdefgh") == 2);
    CHECK(text::approx_tokens("abcdefghi") == 3);
  }

  TEST_CASE("sentence split reproduces input") {
    const std::string s = "One. Two! Three? \xE5\x9B\x9B\xE3\x80\x82" "Five";
    const auto parts = text::split_sentences(s);
    std::string joined;
    for (const auto& p : parts) joined += p;
    CHECK(joined == s);
    CHECK(parts.size() == 5);
  }

  TEST_CASE("rfc3339 parse and format") {
    const auto t = parse_rfc3339("2024-02-29T12:34:56Z");
    CHECK(format_rfc3339(t) == "2024-02-29T12:34:56Z");
    CHECK(format_rfc3339(parse_rfc3339("2024-03-01T01:00:00+02:00")) == "2024-02-29T23:00:00Z");
    CHECK(format_rfc3339(parse_rfc3339("2023-05-06")) == "2023-05-06T00:00:00Z");
    CHECK(year_of(t) == 2024);
    CHECK_THROWS_AS(parse_rfc3339("yesterday"), Error);
  }

  TEST_CASE("rubric json round-trip and verdict parsing") {
    Rubric r{"r1", "Cites primary sources.", -2.0, RubricRole::kNegative, "why", true};
    const auto back = rubric_from_json(to_json(r));
    CHECK(back.id == "r1");
    CHECK(back.weight == -2.0);
    CHECK(back.role == RubricRole::kNegative);
    CHECK(back.fatal);
    CHECK(parse_verdict("Partially Satisfied") == Verdict::kPartiallySatisfied);
    CHECK(parse_verdict("fully_satisfied") == Verdict::kFullySatisfied);
    CHECK_FALSE(parse_verdict("maybe").has_value());
    CHECK(parse_role("implicit") == RubricRole::kImplicit);
  }

  TEST_CASE("extract_json finds embedded objects") {
    const auto j = extract_json("Sure! ```json\n{\"a\": \"}\", \"b\": [1, 2]}\n``` done");
    REQUIRE(j.has_value());
    CHECK((*j)["a"] == "}");
    CHECK_FALSE(extract_json("no json here").has_value());
    CHECK(extract_json("{broken} then [1,2]")->is_array());
  }

  TEST_CASE("jsonl write, read and append") {
    drtest::TempDir dir;
    write_jsonl(dir / "a.jsonl", {Json{{"x", 1}}, Json{{"x", 2}}});
    auto rows = read_jsonl(dir / "a.jsonl");
    REQUIRE(rows.size() == 2);
    {
      JsonlAppender app(dir / "a.jsonl");
      app.append(Json{{"x", 3}});
    }
    rows = read_jsonl(dir / "a.jsonl");
    REQUIRE(rows.size() == 3);
    CHECK(rows[2]["x"] == 3);
  }

  TEST_CASE("scripted model replays in order") {
    ScriptedModelClient m(std::vector<std::string>{"one", "two"});
    CHECK(m.complete({}).text == "one");
    CHECK(m.complete({}).text == "two");
    CHECK(m.calls() == 2);
  }

  TEST_CASE("seeded helpers are reproducible") {
    Rng a(stream_seed(7, 3)), b(stream_seed(7, 3));
    for (int i = 0; i < 100; ++i) CHECK(uniform_index(a, 13) == uniform_index(b, 13));
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
      const double u = uniform01(r);
      CHECK((u >= 0.0 && u < 1.0));
    }
    std::vector<int> v{1, 2, 3, 4, 5};
    Rng s(9);
    shuffle(v, s);
    CHECK(std::multiset<int>(v.begin(), v.end()) == std::multiset<int>{1, 2, 3, 4, 5});
  }

  TEST_CASE("parallel_map keeps index order") {
    const auto out = parallel_map(100, 8, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == i * i);
    CHECK_THROWS(parallel_map(10, 4, [](std::size_t i) -> int {
      if (i == 5) throw Error(ErrorCode::kIo, "x");
      return 0;
    }));
  }
}
