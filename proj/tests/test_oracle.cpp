#include "doctest.h"
#include "ldnet/oracle.hpp"
#include "support.hpp"

using namespace ldnet;
using ldnet::testing::corpus;

namespace {

RatePair rate(long long n1, long long d1, long long n2, long long d2) { return {Rational(n1, d1), Rational(n2, d2)}; }

SearchSpace space(int bits, int slots, CodeShape shape = CodeShape::Scalar) {
    SearchSpace out;
    out.field_bits = bits;
    out.slots = slots;
    out.shape = shape;
    return out;
}

void check_witness(const Network& net, const OracleResult& result, CodeShape shape) {
    REQUIRE(result.status == OracleStatus::Found);
    REQUIRE(result.witness);
    CHECK(result.decoding.all_decodable());
    const Reception rec = propagate(net, *result.witness);
    CHECK(verify_decoding(rec, user_demands(result.witness->layout), result.witness->degree).all_decodable());
    CHECK(witness_is_lawful(net, *result.witness, rec, shape));
}

}  // namespace

TEST_CASE("diamond needs a larger field than GF(2) for scalar codes") {
    const Network net = corpus("diamond_f4");
    const OracleResult gf4 = brute_force_achievable(net, rate(1, 1, 1, 1), space(2, 1));
    check_witness(net, gf4, CodeShape::Scalar);
    CHECK(gf4.verdict.starts_with("witness found in space GF(4), T=1"));

    for (int slots : {1, 2}) {
        const OracleResult gf2 = brute_force_achievable(net, rate(1, 1, 1, 1), space(1, slots));
        CHECK(gf2.status == OracleStatus::NotFound);
        CHECK(gf2.verdict.starts_with("no linear witness in space GF(2), T=" + std::to_string(slots)));
    }
}

TEST_CASE("GF(2) two-slot matrix codes embed the GF(4) scalar witness") {
    const Network net = corpus("diamond_f4");
    const OracleResult matrix = brute_force_achievable(net, rate(1, 1, 1, 1), space(1, 2, CodeShape::Matrix));
    check_witness(net, matrix, CodeShape::Matrix);
    CHECK(describe(space(1, 2, CodeShape::Matrix)) == "GF(2), T=2, full 2x2 matrix per node");
}

TEST_CASE("oracle trivial and routing cases") {
    const Network disjoint = corpus("disjoint");
    check_witness(disjoint, brute_force_achievable(disjoint, rate(0, 1, 0, 1), space(1, 1)), CodeShape::Scalar);
    check_witness(disjoint, brute_force_achievable(disjoint, rate(1, 1, 1, 1), space(1, 1)), CodeShape::Scalar);
    const Network zigzag = corpus("zigzag");
    CHECK(brute_force_achievable(zigzag, rate(1, 1, 1, 1), space(2, 1)).status == OracleStatus::NotFound);
    check_witness(zigzag, brute_force_achievable(zigzag, rate(1, 2, 1, 2), space(1, 2)), CodeShape::Scalar);
}

TEST_CASE("oracle respects the work cap") {
    SearchSpace tight = space(1, 2, CodeShape::Matrix);
    tight.cap = 1000;
    const OracleResult result = brute_force_achievable(corpus("diamond_f4"), rate(1, 1, 1, 1), tight);
    CHECK(result.status == OracleStatus::CapExceeded);
    CHECK(result.work <= 1000);
    CHECK_FALSE(result.witness);
    CHECK(result.nominal_size == std::uint64_t{1} << 24);
}

TEST_CASE("oracle results do not depend on the worker count") {
    const Network net = corpus("asym_dashed");
    SearchSpace serial = space(1, 2, CodeShape::Matrix);
    SearchSpace parallel = serial;
    parallel.workers = 4;
    const OracleResult one = brute_force_achievable(net, rate(1, 2, 1, 1), serial);
    const OracleResult many = brute_force_achievable(net, rate(1, 2, 1, 1), parallel);
    REQUIRE(one.witness);
    REQUIRE(many.witness);
    CHECK(one.work == many.work);
    CHECK(scheme_json(*one.witness).dump() == scheme_json(*many.witness).dump());
}

TEST_CASE("generator is deterministic and valid") {
    GenParams params;
    params.internal_layers = 2;
    params.min_width = 2;
    params.max_width = 3;
    params.seed = 7;
    CHECK(serialize_network(generate_network(params)) == serialize_network(generate_network(params)));

    GenParams forced;
    forced.internal_layers = 1;
    forced.min_width = 1;
    forced.max_width = 1;
    forced.edge_probability = 1.0;
    const Network single = generate_network(forced);
    CHECK(parents(single, "u1") == NodeSet{"s1", "s2"});
    CHECK(is_omniscient(single, "u1"));
    CHECK(classify(single).region == RegionKind::Triangle);

    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        params.seed = seed;
        const Network net = generate_network(params);
        CHECK_NOTHROW(parse_network(serialize_network(net)));
        CHECK(net.warnings().empty());
    }
    CHECK_THROWS_AS(generate_network(GenParams{0, 1, 1, 0.5, 1, 10}), std::invalid_argument);
}

TEST_CASE("cross validation of the corpus") {
    for (const auto& name : {"zigzag", "asym", "asym_dashed", "disjoint"}) {
        CAPTURE(name);
        const CrossValidation result = cross_validate(corpus(name));
        CHECK(result.violations.empty());
        CHECK(result.inconclusive.empty());
        for (const auto& check : result.completeness) CHECK(check.success);
    }
    const CrossValidation asym = cross_validate(corpus("asym"));
    bool probed_full = false;
    for (const auto& check : asym.soundness) probed_full |= check.rate == rate(1, 1, 1, 1);
    CHECK(probed_full);
}

TEST_CASE("outside points cover the half grid beyond the region") {
    const auto points = outside_points(RegionKind::Trapezoid12, 2);
    for (const auto& point : points) CHECK_FALSE(region_contains(RegionKind::Trapezoid12, point));
    CHECK(std::find(points.begin(), points.end(), rate(1, 1, 1, 2)) != points.end());
    CHECK(outside_points(RegionKind::Square, 2).empty());
    CHECK(outside_points(RegionKind::Triangle, 1) == std::vector<RatePair>{rate(1, 1, 1, 1)});
}

TEST_CASE("small fuzz run is consistent") {
    const auto outcomes = run_fuzz(40, 5, 2, {});
    for (const auto& outcome : outcomes) {
        CAPTURE(outcome.error);
        CHECK(outcome.consistent());
    }
}
