#include "doctest.h"

#include <random>

#include "support/test_support.hpp"

using namespace monitord;

TEST_CASE("bundle keys are unique and put is an upsert") {
  Bundle b;
  b.put_int("a", 1).put_int("b", 2);
  b.put_int("a", 3);
  CHECK(b.size() == 2);
  CHECK(*b.get_int("a") == 3);
  CHECK(b.keys() == std::vector<std::string>{"a", "b"});  // position preserved
}

TEST_CASE("bundle equality is structural and order-sensitive") {
  Bundle x, y;
  x.put_int("a", 1).put_int("b", 2);
  y.put_int("b", 2).put_int("a", 1);
  CHECK(x != y);
  Bundle z;
  z.put_int("a", 1).put_int("b", 2);
  CHECK(x == z);
}

TEST_CASE("serialize then deserialize round-trips structurally") {
  Bundle b;
  b.put_text("cmd", "setPolicy");
  b.put_int("n", -42);
  b.put_real("x", 0.0625);
  b.put_bool("flag", true);
  b.put_bytes("raw", Bytes{0, 1, 254, 255});
  Bundle inner;
  inner.put_text("te.type", "app_t");
  b.put_bundle("label", inner);
  b.put_list("tags", ValueList{Value("a"), Value("b")});
  CHECK(Bundle::deserialize(b.serialize()) == b);
}

TEST_CASE("bundle round-trip property over the value grammar") {
  std::mt19937_64 rng(20260810);
  for (int i = 0; i < 300; ++i) {
    Bundle b = test::random_bundle(rng, Bundle::kMaxDepth);
    Bundle back = Bundle::deserialize(b.serialize());
    REQUIRE(back == b);
  }
}

TEST_CASE("nesting depth is capped at 16") {
  Bundle inner;
  inner.put_int("leaf", 1);
  Bundle cur = inner;
  for (int i = 0; i < 15; ++i) {
    Bundle outer;
    outer.put_bundle("c", cur);
    cur = outer;
  }
  CHECK(cur.depth() == 16);
  Bundle too_deep;
  CHECK_THROWS_AS(too_deep.put_bundle("c", cur), Error);
  // lists do not add a level themselves but their elements count
  Bundle with_list;
  CHECK_THROWS_AS(with_list.put_list("l", ValueList{Value(cur)}), Error);
  Bundle shallow;
  shallow.put_list("l", ValueList{Value(inner)});
  CHECK(shallow.depth() == 2);
}

TEST_CASE("lists are homogeneous") {
  CHECK_THROWS_AS(Value(ValueList{Value(1), Value("x")}), Error);
  CHECK_NOTHROW(Value(ValueList{}));
  CHECK_NOTHROW(Value(ValueList{Value("a"), Value("b")}));
}

TEST_CASE("plain json mapping keeps scalar kinds and bytes") {
  Bundle b;
  b.put_text("cmd", "ping");
  b.put_int("n", 4);
  b.put_bytes("raw", Bytes{1, 2, 3});
  auto plain = b.to_plain_json();
  CHECK(plain["cmd"] == "ping");
  CHECK(Bundle::from_plain_json(plain) == b);
}

TEST_CASE("base64 round-trip") {
  for (std::size_t len : {0u, 1u, 2u, 3u, 4u, 17u}) {
    Bytes data;
    for (std::size_t i = 0; i < len; ++i) data.push_back(static_cast<std::uint8_t>(i * 37 + 5));
    CHECK(base64_decode(base64_encode(data)) == data);
  }
  CHECK_THROWS_AS(base64_decode("a"), Error);
}

TEST_CASE("type mismatches surface as errors") {
  Bundle b;
  b.put_int("n", 1);
  CHECK_THROWS_AS(b.at("n").as_text(), Error);
  CHECK_THROWS_AS(b.at("missing"), Error);
  CHECK(b.find("missing") == nullptr);
}
