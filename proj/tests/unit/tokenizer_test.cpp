#include <gtest/gtest.h>

#include <fstream>

#include "patchloom/statement/tokenizer.hpp"

using namespace patchloom::statement;

TEST(Tokenizer, GoldenFile) {
  std::ifstream in(std::string(PATCHLOOM_FIXTURE_DIR) + "/tokenizer_golden.tsv");
  ASSERT_TRUE(in);
  int cases = 0;
  for (std::string line; std::getline(in, line);) {
    const auto tab = line.rfind('\t');
    ASSERT_NE(tab, std::string::npos);
    const auto input = line.substr(0, tab);
    const auto expected = line.substr(tab + 1);
    const auto result = tokenize(input);
    if (expected == "<error>") {
      EXPECT_FALSE(result) << input;
    } else {
      ASSERT_TRUE(result) << input;
      EXPECT_EQ(result.statement->joined(), expected) << input;
    }
    ++cases;
  }
  EXPECT_EQ(cases, 30);
}

TEST(Tokenizer, ErrorsAreReported) {
  auto r = tokenize("String s = \"open");
  EXPECT_FALSE(r);
  EXPECT_EQ(r.error, TokenizeError::unterminated_literal);
  r = tokenize("   // only a comment");
  EXPECT_FALSE(r);
  EXPECT_EQ(r.error, TokenizeError::empty);
}

TEST(Tokenizer, JoinedFormIsAFixedPoint) {
  for (const char* s : {"a.b(c[1], \"x y\") >>= 2;", "List<Map<K,V>> m = f();",
                        "x = y -> y.z;", "char c = ' ';"}) {
    const auto once = tokenize(s);
    ASSERT_TRUE(once) << s;
    const auto twice = tokenize(once.statement->joined());
    ASSERT_TRUE(twice) << s;
    EXPECT_EQ(twice.statement->tokens, once.statement->tokens) << s;
  }
}

TEST(Tokenizer, FromJoinedSplitsOnSpaces) {
  const auto t = from_joined("return this . height ;");
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"return", "this", ".", "height", ";"}));
  EXPECT_EQ(join_tokens(t.tokens), "return this . height ;");
}

TEST(Tokenizer, TokenClasses) {
  EXPECT_TRUE(is_java_keyword("return"));
  EXPECT_FALSE(is_java_keyword("height"));
  EXPECT_TRUE(is_primitive_type("int"));
  EXPECT_TRUE(is_identifier("_x$1"));
  EXPECT_FALSE(is_identifier("1x"));
  EXPECT_FALSE(is_identifier("class"));
  EXPECT_TRUE(is_literal("\"s\""));
  EXPECT_TRUE(is_literal("0x1F"));
  EXPECT_TRUE(is_literal("'c'"));
  EXPECT_TRUE(is_literal("null"));
  EXPECT_FALSE(is_literal("x"));
}
