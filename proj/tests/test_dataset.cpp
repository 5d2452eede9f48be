#include "runent/dataset.hpp"

#include "runent/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace runent;

namespace {

// True iff s = (1-u)*x + u*y coordinate-wise for one u in [0,1). u is
// recovered from the best-conditioned coordinate (largest |y-x|).
bool is_convex_combination(const std::vector<double>& s, const std::vector<double>& x,
                           const std::vector<double>& y, double tol = 1e-12) {
    double u = 0.0;
    double widest = 0.0;
    for (std::size_t d = 0; d < s.size(); ++d) {
        if (std::abs(y[d] - x[d]) > widest) {
            widest = std::abs(y[d] - x[d]);
            u = (s[d] - x[d]) / (y[d] - x[d]);
        }
    }
    if (!(u >= 0.0 && u < 1.0)) return false;
    for (std::size_t d = 0; d < s.size(); ++d) {
        if (std::abs(s[d] - (x[d] + u * (y[d] - x[d]))) > tol) return false;
    }
    return true;
}

// Every synthetic must be a convex combination of its origin (known from the
// documented output order: g synthetics per minority instance, in order)
// and one of the original minority instances.
void check_convexity(const Dataset& original, const Dataset& augmented, int g) {
    std::vector<const LabeledInstance*> minority;
    const std::size_t n_failed = original.count(Label::Failed);
    const std::size_t n_normal = original.count(Label::Normal);
    const Label min_label = n_failed <= n_normal ? Label::Failed : Label::Normal;
    for (const auto& inst : original.instances) {
        if (inst.label == min_label) minority.push_back(&inst);
    }
    const std::size_t n_orig = original.instances.size();
    REQUIRE(augmented.instances.size() == n_orig + minority.size() * static_cast<std::size_t>(g));
    for (std::size_t s = n_orig; s < augmented.instances.size(); ++s) {
        const auto& synth = augmented.instances[s];
        REQUIRE(synth.synthetic);
        const auto& origin = *minority[(s - n_orig) / static_cast<std::size_t>(g)];
        bool ok = false;
        for (const auto* other : minority) {
            if (other != &origin &&
                is_convex_combination(synth.features, origin.features, other->features)) {
                ok = true;
                break;
            }
        }
        REQUIRE(ok);
    }
}

}  // namespace

TEST_CASE("smote reproduces the reference oversampling amounts") {
    SUBCASE("1119 failed / 14227 normal, target 0.2 -> 300%") {
        const Dataset ds = testsupport::random_dataset(1119, 14227, 1);
        const SmoteResult r = smote(ds, 0.2, 5, 42);
        CHECK(r.amount == 3);
        CHECK(r.data.count(Label::Failed) == 4476);
        CHECK(r.data.count(Label::Normal) == 14227);
    }
    SUBCASE("185 failed / 3025 normal, target 0.2 -> 400%") {
        const Dataset ds = testsupport::random_dataset(185, 3025, 2);
        const SmoteResult r = smote(ds, 0.2, 5, 42);
        CHECK(r.amount == 4);
        CHECK(r.data.count(Label::Failed) == 925);
        CHECK(r.data.count(Label::Normal) == 3025);
    }
}

TEST_CASE("smote synthetics lie on segments between minority neighbors") {
    Dataset ds;
    ds.instances.push_back({"a", {0.0, 0.0, 0.0}, Label::Failed, false});
    ds.instances.push_back({"b", {1.0, 1.0, 1.0}, Label::Failed, false});
    for (int i = 0; i < 8; ++i) {
        ds.instances.push_back({"n" + std::to_string(i), {5.0, 5.0, 5.0}, Label::Normal, false});
    }
    const SmoteResult r = smote(ds, 0.3, 1, 7);
    CHECK(r.amount == 1);
    REQUIRE(r.data.instances.size() == 12);
    for (std::size_t i = 10; i < 12; ++i) {
        const auto& s = r.data.instances[i].features;
        CHECK(s[0] == s[1]);
        CHECK(s[1] == s[2]);
        CHECK(s[0] >= 0.0);
        CHECK(s[0] < 1.0);
    }
    check_convexity(ds, r.data, r.amount);
}

TEST_CASE("smote preserves originals and the count identity") {
    const Dataset ds = testsupport::random_dataset(20, 100, 3);
    const SmoteResult r = smote(ds, 0.4, 5, 9);
    REQUIRE(r.amount > 0);
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        CHECK(r.data.instances[i].trace_id == ds.instances[i].trace_id);
        CHECK(r.data.instances[i].features == ds.instances[i].features);
        CHECK(!r.data.instances[i].synthetic);
    }
    CHECK(r.data.instances.size() ==
          ds.instances.size() + static_cast<std::size_t>(r.amount) * 20);
    check_convexity(ds, r.data, r.amount);
}

TEST_CASE("smote is deterministic per seed and varies across seeds") {
    const Dataset ds = testsupport::random_dataset(10, 50, 4);
    const SmoteResult a = smote(ds, 0.3, 5, 1);
    const SmoteResult b = smote(ds, 0.3, 5, 1);
    const SmoteResult c = smote(ds, 0.3, 5, 2);
    CHECK(to_csv(a.data) == to_csv(b.data));
    CHECK(to_csv(a.data) != to_csv(c.data));
    CHECK(a.data.instances.size() == c.data.instances.size());
}

TEST_CASE("smote reports an already-met target as a no-op") {
    const Dataset ds = testsupport::random_dataset(50, 50, 5);
    const SmoteResult r = smote(ds, 0.2, 5, 1);
    CHECK(r.already_balanced);
    CHECK(r.amount == 0);
    CHECK(r.data.instances.size() == ds.instances.size());
}

TEST_CASE("smote rejects a minority class below two instances") {
    CHECK_THROWS_AS(smote(testsupport::random_dataset(1, 50, 6), 0.2, 5, 1), MinorityTooSmall);
    CHECK_THROWS_AS(smote(testsupport::random_dataset(0, 50, 6), 0.2, 5, 1), MinorityTooSmall);
}

TEST_CASE("forced smote amount overrides the target rule") {
    const Dataset ds = testsupport::random_dataset(10, 20, 7);
    const SmoteResult r = smote(ds, 0.2, 5, 1, 26);
    CHECK(r.amount == 26);
    CHECK(r.data.count(Label::Failed) == 10 * 27);
}

TEST_CASE("stratified folds keep proportions and partition the data") {
    const Dataset ds = testsupport::random_dataset(20, 80, 8);
    const auto folds = stratified_kfold(ds, 10, 3);
    REQUIRE(folds.size() == 10);
    std::set<std::size_t> seen;
    for (const auto& fold : folds) {
        CHECK(fold.test.size() == 10);
        std::size_t failed = 0;
        for (std::size_t i : fold.test) {
            CHECK(seen.insert(i).second);  // disjoint
            if (ds.instances[i].label == Label::Failed) ++failed;
        }
        CHECK(failed == 2);
        CHECK(fold.train.size() == 90);
        std::set<std::size_t> train_set(fold.train.begin(), fold.train.end());
        for (std::size_t i : fold.test) CHECK(train_set.count(i) == 0);
    }
    CHECK(seen.size() == 100);
}

TEST_CASE("ten single-class instances fold into leave-one-out") {
    const Dataset ds = testsupport::random_dataset(0, 10, 9);
    const auto folds = stratified_kfold(ds, 10, 1);
    for (const auto& fold : folds) {
        CHECK(fold.test.size() == 1);
        CHECK(fold.train.size() == 9);
    }
}

TEST_CASE("fold sizes stay within one of n/k, remainder first") {
    const Dataset ds = testsupport::random_dataset(4141, 15849, 10);  // 19990 total
    const auto folds = stratified_kfold(ds, 10, 5);
    std::size_t total = 0;
    for (const auto& fold : folds) {
        CHECK(fold.test.size() == 1999);
        std::size_t failed = 0;
        for (std::size_t i : fold.test) {
            if (ds.instances[i].label == Label::Failed) ++failed;
        }
        CHECK(failed >= 414);  // global proportion within one instance
        CHECK(failed <= 415);
        total += fold.test.size();
    }
    CHECK(total == 19990);

    const Dataset odd = testsupport::random_dataset(23, 80, 11);  // 103 total
    const auto odd_folds = stratified_kfold(odd, 10, 5);
    for (std::size_t f = 0; f < odd_folds.size(); ++f) {
        CHECK(odd_folds[f].test.size() == (f < 3 ? 11 : 10));
    }
}

TEST_CASE("kfold rejects classes smaller than k") {
    CHECK_THROWS_AS(stratified_kfold(testsupport::random_dataset(5, 80, 12), 10, 1),
                    ClassTooSmall);
}

TEST_CASE("kfold is deterministic per seed") {
    const Dataset ds = testsupport::random_dataset(30, 70, 13);
    const auto a = stratified_kfold(ds, 10, 77);
    const auto b = stratified_kfold(ds, 10, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t f = 0; f < a.size(); ++f) {
        CHECK(a[f].test == b[f].test);
        CHECK(a[f].train == b[f].train);
    }
}

TEST_CASE("csv round-trips datasets losslessly") {
    Dataset ds = testsupport::random_dataset(5, 9, 14);
    ds.instances[0].features = {0.1 + 0.2, 1.0 / 3.0, 1e-17};
    SUBCASE("without synthetics") {
        std::istringstream in(to_csv(ds));
        const Dataset back = read_csv(in);
        REQUIRE(back.instances.size() == ds.instances.size());
        for (std::size_t i = 0; i < ds.instances.size(); ++i) {
            CHECK(back.instances[i].trace_id == ds.instances[i].trace_id);
            CHECK(back.instances[i].features == ds.instances[i].features);
            CHECK(back.instances[i].label == ds.instances[i].label);
            CHECK(back.instances[i].synthetic == ds.instances[i].synthetic);
        }
        CHECK(to_csv(back) == to_csv(ds));
    }
    SUBCASE("with synthetics") {
        ds.instances[2].synthetic = true;
        std::istringstream in(to_csv(ds));
        const Dataset back = read_csv(in);
        CHECK(back.instances[2].synthetic);
        CHECK(to_csv(back) == to_csv(ds));
    }
}

TEST_CASE("csv schema violations are rejected") {
    std::istringstream bad_header("ha,hb\n");
    CHECK_THROWS_AS(read_csv(bad_header), SchemaMismatch);

    std::istringstream bad_label("trace_id,h_a,h_b,h,label\nt1,0.5,0.5,0.5,ok\n");
    CHECK_THROWS_AS(read_csv(bad_label), BadLabel);

    std::istringstream bad_value("trace_id,h_a,h_b,h,label\nt1,abc,0.5,0.5,normal\n");
    CHECK_THROWS_AS(read_csv(bad_value), SchemaMismatch);

    std::istringstream short_row("trace_id,h_a,h_b,h,label\nt1,0.5,0.5,normal\n");
    CHECK_THROWS_AS(read_csv(short_row), SchemaMismatch);
}

TEST_CASE("unknown labels are accepted only on request") {
    const std::string text = "trace_id,h_a,h_b,h,label\nt1,0.5,0.5,0.5,unknown\n";
    std::istringstream strict(text);
    CHECK_THROWS_AS(read_csv(strict), BadLabel);
    std::istringstream relaxed(text);
    const Dataset ds = read_csv(relaxed, /*allow_unknown=*/true);
    REQUIRE(ds.instances.size() == 1);
    CHECK(ds.instances[0].label == Label::Unknown);
}
