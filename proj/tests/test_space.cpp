#include <doctest.h>

#include "idpr/error.hpp"
#include "idpr/space_index.hpp"
#include "oracle/oracle.hpp"
#include "test_util.hpp"

using namespace idpr;

namespace {

std::vector<std::vector<int>> radix_table(const PartGraph& graph,
                                          const RelationModel& relations) {
  std::vector<std::vector<int>> radix(graph.num_parts());
  for (int i = 0; i < graph.num_parts(); ++i) {
    for (int j : graph.neighbors(i)) {
      radix[i].push_back(relations.type_count(graph.directed_id(i, j)));
    }
  }
  return radix;
}

}  // namespace

TEST_SUITE("space") {

TEST_CASE("two-part chain with three types has seven labels") {
  PartGraph g(2, {{0, 1}}, 0);
  RelationModel rel = RelationModel::uniform(g, 3);
  SpaceIndex space(g, rel);
  CHECK(space.flat_size() == 7);
  CHECK(space.part_block_begin(0) == 1);
  CHECK(space.part_block_size(0) == 3);
  CHECK(space.part_block_begin(1) == 4);
}

TEST_CASE("a part with two neighbors owns the product block") {
  PartGraph g(3, {{0, 1}, {1, 2}}, 0);
  RelationModel rel = RelationModel::uniform(g, 11);
  SpaceIndex space(g, rel);
  CHECK(space.part_block_size(1) == 121);
  CHECK(space.flat_size() == 1 + 11 + 121 + 11);
}

TEST_CASE("background is index zero with an empty tuple") {
  PartGraph g(2, {{0, 1}}, 0);
  RelationModel rel = RelationModel::uniform(g, 2);
  SpaceIndex space(g, rel);
  const PatchLabel bg = space.decode(0);
  CHECK(bg.category == 0);
  CHECK(bg.relation_types.empty());
  CHECK(space.encode(bg) == 0);
}

TEST_CASE("encode and decode are inverse bijections") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int parts = 1 + static_cast<int>(rng.next_below(5));
    PartGraph g = testutil::random_tree(rng, parts);
    RelationModel rel = testutil::random_relations(rng, g, 4, 1.0);
    SpaceIndex space(g, rel);

    for (int flat = 0; flat < space.flat_size(); ++flat) {
      const PatchLabel label = space.decode(flat);
      CHECK(space.encode(label) == flat);
    }
  }
}

TEST_CASE("flat order matches the independent label enumeration") {
  Rng rng(18);
  PartGraph g = testutil::random_tree(rng, 4);
  RelationModel rel = testutil::random_relations(rng, g, 3, 1.0);
  SpaceIndex space(g, rel);
  const auto labels = oracle::enumerate_labels(g, radix_table(g, rel));

  REQUIRE(static_cast<int>(labels.size()) == space.flat_size());
  for (int flat = 0; flat < space.flat_size(); ++flat) {
    const PatchLabel decoded = space.decode(flat);
    CHECK(decoded.category == labels[flat].category);
    CHECK(decoded.relation_types == labels[flat].tuple);
  }
}

TEST_CASE("slot lookups agree with ascending neighbor order") {
  PartGraph g(3, {{0, 1}, {1, 2}}, 1);
  // Directed ids: edge 0 = (0,1) -> dirs 0,1; edge 1 = (1,2) -> dirs 2,3.
  RelationModel rel(g, {{{0, 0}, {1, 1}},            // 0->1
                        {{0, 0}, {1, 1}, {2, 2}},    // 1->0
                        {{0, 0}, {1, 1}},            // 1->2
                        {{0, 0}}});                  // 2->1
  SpaceIndex space(g, rel);
  CHECK(space.part_block_size(1) == 6);
  CHECK(space.neighbor_slot(1, 0) == 0);
  CHECK(space.neighbor_slot(1, 2) == 1);
  CHECK(space.slot_radix(1, 0) == 3);   // types of 1->0
  CHECK(space.slot_radix(1, 1) == 2);   // types of 1->2
  CHECK(space.slot_stride(1, 0) == 2);  // last slot varies fastest
  CHECK(space.slot_stride(1, 1) == 1);
  CHECK_THROWS_AS(space.neighbor_slot(0, 2), Error);
}

TEST_CASE("encode rejects out-of-range labels") {
  PartGraph g(2, {{0, 1}}, 0);
  RelationModel rel = RelationModel::uniform(g, 2);
  SpaceIndex space(g, rel);

  PatchLabel bad_cat;
  bad_cat.category = 3;
  CHECK_THROWS_AS(space.encode(bad_cat), Error);

  PatchLabel bad_type;
  bad_type.category = 1;
  bad_type.relation_types = {5};
  CHECK_THROWS_AS(space.encode(bad_type), Error);

  CHECK_THROWS_AS(space.decode(7), Error);
  CHECK_THROWS_AS(space.decode(-1), Error);
}

}  // TEST_SUITE
