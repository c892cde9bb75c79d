#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support/random_models.hpp"
#include "wbdbn/cpd.hpp"
#include "wbdbn/factor.hpp"
#include "wbdbn/model_json.hpp"
#include "wbdbn/synthetic.hpp"
#include "wbdbn/variable.hpp"

using namespace wbdbn;

namespace {

Factor random_factor(Rng& rng, std::vector<Variable> scope) {
    std::size_t n = 1;
    for (const auto& v : scope) n *= static_cast<std::size_t>(v.cardinality);
    std::vector<double> vals(n);
    for (auto& x : vals) x = rng.uniform();
    return Factor(std::move(scope), std::move(vals));
}

} // namespace

TEST(Discretize, BinEdges) {
    EXPECT_EQ(discretize(0.0, 6).index, 0);
    EXPECT_EQ(discretize(1.0 / 6.0, 6).index, 1);
    EXPECT_EQ(discretize(0.5, 6).index, 3);
    EXPECT_EQ(discretize(0.999, 6).index, 5);
    EXPECT_EQ(discretize(1.0, 6).index, 5);
    EXPECT_EQ(discretize(0.49, 2).index, 0);
}

TEST(Discretize, RejectsOutOfRange) {
    EXPECT_THROW(discretize(-0.01, 6), DomainError);
    EXPECT_THROW(discretize(1.01, 6), DomainError);
    EXPECT_THROW(discretize(std::numeric_limits<double>::quiet_NaN(), 6), DomainError);
    EXPECT_THROW(discretize(0.5, 1), DomainError);
}

TEST(Discretize, MonotoneAndMidpointClose) {
    for (int n = 2; n <= 10; ++n) {
        int last = 0;
        for (int k = 0; k <= 10000; ++k) {
            const double x = k / 10000.0;
            const Bin b = discretize(x, n);
            EXPECT_GE(b.index, last);
            last = b.index;
            EXPECT_LE(std::abs(bin_midpoint(b) - x), 1.0 / (2.0 * n) + 1e-15);
        }
    }
}

TEST(Factor, CanonicalOrderIsIndependentOfConstructionOrder) {
    const Variable a{"a", 2}, b{"b", 3};
    // values row-major over (b, a)
    Factor f({b, a}, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(f.scope()[0].name, "a");
    EXPECT_DOUBLE_EQ(f.at({{"a", 1}, {"b", 2}}), 6.0);
    EXPECT_DOUBLE_EQ(f.at({{"a", 0}, {"b", 1}}), 3.0);
    EXPECT_DOUBLE_EQ(f.at({{"a", 1}, {"b", 0}}), 2.0);
}

TEST(Factor, RejectsBadShapes) {
    EXPECT_THROW(Factor({Variable{"a", 2}}, {1.0}), ModelError);
    EXPECT_THROW(Factor({Variable{"a", 2}, Variable{"a", 2}}, {1, 1, 1, 1}), ModelError);
}

TEST(FactorProduct, IdentityAndZero) {
    Rng rng(1);
    const Variable a{"a", 2}, b{"b", 3};
    const Factor f = random_factor(rng, {a, b});
    const Factor ones = Factor::filled({a, b}, 1.0);
    EXPECT_EQ(factor_product(f, ones).values(), f.values());
    const Factor zero({}, {0.0});
    const Factor z = factor_product(zero, f);
    EXPECT_EQ(z.scope(), f.scope());
    for (double x : z.values()) EXPECT_EQ(x, 0.0);
}

TEST(FactorProduct, MatchesNestedLoops) {
    Rng rng(2);
    const Variable a{"a", 2}, b{"b", 2}, c{"c", 2};
    for (int trial = 0; trial < 20; ++trial) {
        const Factor f = random_factor(rng, {a, b});
        const Factor g = random_factor(rng, {b, c});
        const Factor h = factor_product(f, g);
        ASSERT_EQ(h.size(), 8u);
        for (int x = 0; x < 2; ++x) {
            for (int y = 0; y < 2; ++y) {
                for (int z = 0; z < 2; ++z) {
                    const double want = f.values()[static_cast<std::size_t>(x * 2 + y)] *
                                        g.values()[static_cast<std::size_t>(y * 2 + z)];
                    EXPECT_EQ(h.values()[static_cast<std::size_t>((x * 2 + y) * 2 + z)], want);
                }
            }
        }
    }
}

TEST(FactorProduct, CardinalityMismatchThrows) {
    EXPECT_THROW(factor_product(Factor::filled({Variable{"a", 2}}, 1.0), Factor::filled({Variable{"a", 3}}, 1.0)),
                 ModelError);
}

TEST(FactorProduct, CommutativeAndAssociative) {
    Rng rng(3);
    const Variable a{"a", 2}, b{"b", 3}, c{"c", 4}, d{"d", 2};
    for (int trial = 0; trial < 20; ++trial) {
        const Factor f = random_factor(rng, {c, a});
        const Factor g = random_factor(rng, {b, c, d});
        const Factor h = random_factor(rng, {d, a});
        EXPECT_EQ(factor_product(f, g).values(), factor_product(g, f).values());
        const Factor l = factor_product(factor_product(f, g), h);
        const Factor r = factor_product(f, factor_product(g, h));
        ASSERT_EQ(l.scope(), r.scope());
        // Three-way products can round differently depending on grouping.
        EXPECT_LE(max_abs_difference(l, r), 1e-15);
    }
}

TEST(Marginalize, Examples) {
    const Variable a{"a", 2}, b{"b", 3};
    const Factor m = marginalize(Factor::filled({a, b}, 1.0), "a");
    ASSERT_EQ(m.scope(), std::vector<Variable>{b});
    for (double x : m.values()) EXPECT_EQ(x, 2.0);
    EXPECT_THROW(marginalize(m, "a"), UsageError);

    Rng rng(4);
    Factor joint = normalize(random_factor(rng, {a, b, Variable{"c", 4}}));
    joint = marginalize(marginalize(marginalize(joint, "b"), "a"), "c");
    EXPECT_TRUE(joint.is_scalar());
    EXPECT_NEAR(joint.values()[0], 1.0, 1e-9);
}

TEST(Marginalize, MatchesNestedLoops) {
    Rng rng(5);
    const Variable a{"a", 3}, b{"b", 2}, c{"c", 4};
    const Factor f = random_factor(rng, {a, b, c});
    const Factor m = marginalize(f, "b");
    for (int x = 0; x < 3; ++x) {
        for (int z = 0; z < 4; ++z) {
            double want = 0.0;
            for (int y = 0; y < 2; ++y) want += f.values()[static_cast<std::size_t>((x * 2 + y) * 4 + z)];
            EXPECT_NEAR(m.values()[static_cast<std::size_t>(x * 4 + z)], want, 1e-15);
        }
    }
}

TEST(Marginalize, CommutesWithProductOverForeignVariable) {
    Rng rng(6);
    const Variable a{"a", 2}, b{"b", 3}, c{"c", 2};
    for (int trial = 0; trial < 20; ++trial) {
        const Factor f = random_factor(rng, {a, b});
        const Factor g = random_factor(rng, {b, c});
        const Factor l = marginalize(factor_product(f, g), "c");
        const Factor r = factor_product(f, marginalize(g, "c"));
        EXPECT_LE(max_abs_difference(l, r), 1e-15);
    }
}

TEST(Normalize, Examples) {
    const Variable a{"a", 2};
    EXPECT_EQ(normalize(Factor({a}, {2, 2})).values(), (std::vector<double>{0.5, 0.5}));
    EXPECT_THROW(normalize(Factor({a}, {0, 0})), DegenerateEvidence);
    const Factor p({Variable{"b", 3}}, {0.2, 0.3, 0.5});
    EXPECT_LE(max_abs_difference(normalize(p), p), 1e-12);
}

TEST(Reduce, FixesOneVariable) {
    const Variable a{"a", 2}, b{"b", 3};
    Factor f({a, b}, {1, 2, 3, 4, 5, 6});
    const Factor r = reduce(f, "b", 2);
    EXPECT_EQ(r.values(), (std::vector<double>{3, 6}));
}

TEST(Cpd, ColumnsMustSumToOne) {
    const Variable c{"c", 2}, p{"p", 2};
    EXPECT_NO_THROW(CpdTable::from_columns(c, {p}, {{0.3, 0.7}, {1.0, 0.0}}));
    EXPECT_THROW(CpdTable::from_columns(c, {p}, {{0.3, 0.6}, {1.0, 0.0}}), ModelError);
    EXPECT_THROW(CpdTable::from_columns(c, {p}, {{-0.1, 1.1}, {1.0, 0.0}}), ModelError);
    const auto cpd = CpdTable::from_columns(c, {p}, {{0.3, 0.7}, {0.9, 0.1}});
    EXPECT_DOUBLE_EQ(cpd.probability(1, {{"p", 0}}), 0.7);
    EXPECT_DOUBLE_EQ(cpd.probability(0, {{"p", 1}}), 0.9);
}

TEST(ModelJson, RoundTripIsBitIdentical) {
    Rng rng(7);
    for (int n = 2; n <= 6; ++n) {
        const auto m = testkit::random_model(rng, n);
        const auto text = to_json(m).dump();
        const auto back = model_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(to_json(back).dump(), text);
        for (auto c : {Contributor::R, Contributor::O}) {
            for (const auto& cpd : m.regime(c).cpds) {
                EXPECT_EQ(back.regime(c).cpd_for(cpd.child().name).table().values(), cpd.table().values());
            }
        }
    }
}

TEST(ModelJson, RejectsMalformedDocuments) {
    auto doc = to_json(make_uniform_model(default_structure(), 3));
    auto bad = doc;
    bad["regimes"]["R"][0]["values"][0] = 0.9;
    EXPECT_THROW(model_from_json(bad), ModelError);
    bad = doc;
    bad.erase("prior");
    EXPECT_THROW(model_from_json(bad), ModelError);
    bad = doc;
    bad["format"] = "something-else";
    EXPECT_THROW(model_from_json(bad), ModelError);
}

TEST(Structure, DefaultIsValid) { EXPECT_NO_THROW(validate_structure(default_structure())); }

TEST(Structure, RejectsIllegalEdges) {
    auto s = default_structure();
    s.o_parents["w"].push_back("aR");
    EXPECT_THROW(validate_structure(s), ModelError);

    s = default_structure();
    s.r_parents["w"].push_back("wO");
    EXPECT_THROW(validate_structure(s), ModelError);

    s = default_structure();
    s.r_parents["i"].push_back("al");
    EXPECT_THROW(validate_structure(s), ModelError);

    s = default_structure();
    s.r_parents["t"].push_back("w");
    s.r_parents["w"].push_back("t");
    EXPECT_THROW(validate_structure(s), ModelError);

    // al on i's parent makes i an implicit parent of the child.
    s = default_structure();
    s.r_parents["i"].push_back("w");
    EXPECT_THROW(validate_structure(s), ModelError);

    s = default_structure();
    s.r_parents.erase("t");
    EXPECT_THROW(validate_structure(s), ModelError);
}

TEST(Structure, RandomStructuresAreValid) {
    Rng rng(8);
    for (int k = 0; k < 200; ++k) EXPECT_NO_THROW(testkit::random_structure(rng));
}
