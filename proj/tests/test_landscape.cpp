#include <cmath>
#include <random>

#include "doctest.h"
#include "metastab/landscape.hpp"

using namespace metastab;
using namespace metastab::landscape;

namespace {

Box box1d(double a, double b) {
    Box bx;
    bx.lo = Eigen::VectorXd::Constant(1, a);
    bx.hi = Eigen::VectorXd::Constant(1, b);
    return bx;
}

Box box2d(double a, double b) {
    Box bx;
    bx.lo = Eigen::VectorXd::Constant(2, a);
    bx.hi = Eigen::VectorXd::Constant(2, b);
    return bx;
}

SmoothMap scalar1d(const std::string& text) {
    return SmoothMap::scalar(Expression::parse(text, 1), 1);
}

}  // namespace

TEST_CASE("critical points of the symmetric double well") {
    auto f = scalar1d("x1^4/4 - x1^2/2");
    auto crits = find_critical_points(f, box1d(-2, 2), 9);
    REQUIRE(crits.size() == 3);
    // sorted by value: minima first
    CHECK(crits[0].value == doctest::Approx(-0.25));
    CHECK(crits[0].x[0] == doctest::Approx(-1.0));
    CHECK(crits[0].index == 0);
    CHECK(crits[1].x[0] == doctest::Approx(1.0));
    CHECK(crits[1].index == 0);
    CHECK(crits[2].x[0] == doctest::Approx(0.0));
    CHECK(crits[2].index == 1);
    CHECK(crits[2].hessian(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("critical points in 2D") {
    auto f = SmoothMap::scalar(Expression::parse("(x1^2-1)^2/4 + x2^2/2", 2), 2);
    auto crits = find_critical_points(f, box2d(-2, 2), 7);
    REQUIRE(crits.size() == 3);
    int nmin = 0, nsad = 0;
    for (const auto& c : crits) {
        if (c.index == 0) {
            ++nmin;
            CHECK(std::abs(std::abs(c.x[0]) - 1.0) < 1e-8);
            CHECK(std::abs(c.x[1]) < 1e-8);
        } else {
            ++nsad;
            CHECK(c.index == 1);
            CHECK(c.x.norm() < 1e-8);
        }
    }
    CHECK(nmin == 2);
    CHECK(nsad == 1);
}

TEST_CASE("single quadratic minimum") {
    auto f = SmoothMap::scalar(Expression::parse("(x1^2 + x2^2)/2", 2), 2);
    auto crits = find_critical_points(f, box2d(-1, 1), 5);
    REQUIRE(crits.size() == 1);
    CHECK(crits[0].index == 0);
    CHECK(crits[0].x.norm() < 1e-9);
}

TEST_CASE("merge tree of the tilted double well") {
    auto f = scalar1d("x1^4/4 - x1^2/2 + x1/10");
    auto bx = box1d(-2, 2);
    auto crits = find_critical_points(f, bx, 9);
    auto ms = merge_tree(f, bx, {801}, crits);
    REQUIRE(ms.saddles.size() == 1);
    const auto& s = ms.saddles[0];
    CHECK(crits[s.critical].index == 1);
    // saddle at the middle root of x^3 - x + 1/10 (Newton from 0.1 by hand)
    CHECK(std::abs(crits[s.critical].x[0] - 0.101031) < 1e-4);
    CHECK(s.minimum_a != s.minimum_b);
}

TEST_CASE("labeling of the tilted double well") {
    auto f = scalar1d("x1^4/4 - x1^2/2 + x1/10");
    auto bx = box1d(-2, 2);
    auto crits = find_critical_points(f, bx, 9);
    auto ms = merge_tree(f, bx, {801}, crits);
    auto lab = label(ms);
    REQUIRE(lab.minima.size() == 2);
    // shallow well first (finite S), global minimum last
    const auto& shallow = lab.minima[0];
    const auto& global = lab.minima[1];
    CHECK(std::isinf(global.S));
    CHECK(crits[global.critical].x[0] < 0);  // tilt +x/10 deepens the left well
    CHECK(shallow.saddles.size() == 1);
    CHECK(global.saddles.empty());
    double fs = crits[shallow.saddles[0]].value;
    CHECK(shallow.sigma == doctest::Approx(fs));
    CHECK(shallow.S == doctest::Approx(fs - crits[shallow.critical].value));
    CHECK(shallow.S > 0);
    CHECK(shallow.m_hat == global.critical);
    CHECK(!shallow.type_two);
    // two singleton classes
    REQUIRE(lab.classes.size() == 2);
    CHECK(lab.classes[0].size() == 1);
    CHECK(lab.classes[1].size() == 1);
}

TEST_CASE("labeling of a 1D triple well") {
    // three Gaussian dips of distinct depth, barriers at distinct levels
    auto f = scalar1d(
        "3 - 1.0*exp(-(x1+1.2)^2/0.08) - 1.5*exp(-(x1)^2/0.08) - "
        "0.7*exp(-(x1-1.2)^2/0.08) + 0.05*x1^2");
    auto bx = box1d(-2.5, 2.5);
    auto crits = find_critical_points(f, bx, 41);
    auto ms = merge_tree(f, bx, {2001}, crits);
    REQUIRE(ms.saddles.size() == 2);
    CHECK(ms.saddles[0].value < ms.saddles[1].value);
    auto lab = label(ms);
    REQUIRE(lab.minima.size() == 3);
    CHECK(std::isinf(lab.minima[2].S));
    CHECK(crits[lab.minima[2].critical].x[0] == doctest::Approx(0.0).epsilon(1e-3));
    // each labeled minimum has exactly one bounding saddle here
    CHECK(lab.minima[0].saddles.size() == 1);
    CHECK(lab.minima[1].saddles.size() == 1);
    // S values positive and increasing in the chosen order
    CHECK(lab.minima[0].S > 0);
    CHECK(lab.minima[0].S <= lab.minima[1].S);
    // reference minima: both shallow wells should reference a deeper one
    for (int i = 0; i < 2; ++i) {
        int hat = lab.minima[i].m_hat;
        CHECK(hat >= 0);
        CHECK(crits[hat].value <= crits[lab.minima[i].critical].value + 1e-12);
    }
    auto rep = check_gener(lab, ms);
    CHECK(rep.pass());
}

TEST_CASE("symmetric double well fails the uniqueness part") {
    auto f = scalar1d("x1^4/4 - x1^2/2");
    auto bx = box1d(-2, 2);
    auto crits = find_critical_points(f, bx, 9);
    auto ms = merge_tree(f, bx, {801}, crits);
    auto lab = label(ms);
    CHECK(lab.degenerate_tie);
    auto rep = check_gener(lab, ms);
    CHECK(!rep.unique_minima);
    CHECK(!rep.pass());
    // the non-global minimum is of type II: its reference has equal depth
    CHECK(lab.has_type_two);
    CHECK(!rep.type_two_empty);
}

TEST_CASE("2D two-well labeling") {
    auto f = SmoothMap::scalar(
        Expression::parse("(x1^2-1)^2/4 + x2^2/2 + x1/10", 2), 2);
    auto bx = box2d(-2, 2);
    auto crits = find_critical_points(f, bx, 7);
    auto ms = merge_tree(f, bx, {161, 161}, crits);
    REQUIRE(ms.saddles.size() == 1);
    auto lab = label(ms);
    REQUIRE(lab.minima.size() == 2);
    CHECK(crits[lab.minima[1].critical].x[0] < 0);
    CHECK(lab.minima[0].S > 0);
    CHECK(check_gener(lab, ms).pass());
}

TEST_CASE("boundary confinement check") {
    // f decreases toward the box edge beyond the saddle level
    auto f = scalar1d("-x1^2");
    auto bx = box1d(-1, 1);
    std::vector<CriticalPoint> crits;
    CHECK_THROWS_AS(find_critical_points(scalar1d("x1"), bx, 5), LandscapeError);
}

TEST_CASE("grid refinement stability of S") {
    auto f = scalar1d("x1^4/4 - x1^2/2 + x1/10");
    auto bx = box1d(-2, 2);
    auto crits = find_critical_points(f, bx, 9);
    auto lab1 = label(merge_tree(f, bx, {401}, crits));
    auto lab2 = label(merge_tree(f, bx, {801}, crits));
    REQUIRE(lab1.minima.size() == lab2.minima.size());
    for (size_t i = 0; i + 1 < lab1.minima.size(); ++i)
        CHECK(lab1.minima[i].S == doctest::Approx(lab2.minima[i].S).epsilon(1e-10));
}
