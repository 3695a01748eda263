#include "ocfs/csv.hpp"
#include "ocfs/data.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <sstream>

using namespace ocfs;

namespace {

DataMatrix parse(const std::string& text, IngestOptions opts = {}) {
    std::istringstream in(text);
    return parse_csv(in, opts);
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no ocfs::Error thrown";
    return Errc::Io;
}

DataMatrix three_by_three() {
    return parse("lot,p1,p2,p3\nA,0,1,2\nB,0,3,4\nC,5,5,6\n");
}

}  // namespace

TEST(LoadCsv, ParsesSmallFile) {
    auto m = parse("lot,p1,p2\nL1,1.5,2\nL2,-3,4e2\nL3,0,7\n");
    EXPECT_EQ(m.n_lots(), 3u);
    EXPECT_EQ(m.n_params(), 2u);
    EXPECT_EQ(m.param_ids(), (std::vector<std::string>{"p1", "p2"}));
    EXPECT_EQ(m.lot_ids(), (std::vector<std::string>{"L1", "L2", "L3"}));
    EXPECT_DOUBLE_EQ(m.value(1, 1), 400.0);
    EXPECT_DOUBLE_EQ(m.value(1, 0), -3.0);
}

TEST(LoadCsv, ImputesMissingCellWithColumnMedian) {
    auto m = parse("lot,p\nA,1\nB,2\nC,\nD,4\n");
    EXPECT_DOUBLE_EQ(m.value(2, 0), 2.0);
}

TEST(LoadCsv, MissingCellWithoutImputationIsAnError) {
    EXPECT_EQ(code_of([] { parse("lot,p\nA,1\nB,\n", {.impute_missing = false}); }), Errc::NonNumericCell);
}

TEST(LoadCsv, RejectsBadInput) {
    EXPECT_EQ(code_of([] { parse("lot,p1,p1\nA,1,2\n"); }), Errc::MalformedCsv);
    EXPECT_EQ(code_of([] { parse("lot,p1,p2\nA,1\n"); }), Errc::MalformedCsv);
    EXPECT_EQ(code_of([] { parse("lot,p1\n"); }), Errc::EmptyData);
    EXPECT_EQ(code_of([] { parse("lot\nA\n"); }), Errc::EmptyData);
    EXPECT_EQ(code_of([] { parse(""); }), Errc::EmptyData);
    EXPECT_EQ(code_of([] { parse("lot,p\nA,abc\n"); }), Errc::NonNumericCell);
    EXPECT_EQ(code_of([] { parse("lot,p\nA,nan\n"); }), Errc::NonNumericCell);
    EXPECT_EQ(code_of([] { parse("lot,p,q\nA,,1\nB,,2\n"); }), Errc::EmptyData);
    EXPECT_EQ(code_of([] { parse("lot,p\nA,1\nA,2\n"); }), Errc::MalformedCsv);
}

TEST(LoadCsv, SkipsCommentLinesAndQuotedIds) {
    auto m = parse("# generated\nlot,\"a,b\"\n\"L,1\",3\n");
    EXPECT_EQ(m.param_ids().front(), "a,b");
    EXPECT_EQ(m.lot_ids().front(), "L,1");
}

TEST(SaveCsv, RoundTripIsBitExact) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    std::vector<double> values(40 * 7);
    for (auto& v : values) v = u(rng) / 3.0;
    values[5] = 1e-300;
    values[6] = -0.0;
    std::vector<std::string> lots, params;
    for (int i = 0; i < 40; ++i) lots.push_back("L" + std::to_string(i));
    for (int j = 0; j < 7; ++j) params.push_back("p" + std::to_string(j));
    DataMatrix m(lots, params, values);
    std::stringstream buf;
    write_csv(buf, m);
    std::istringstream in(buf.str());
    EXPECT_EQ(parse_csv(in), m);
}

TEST(Column, ReturnsStoredValues) {
    auto m = three_by_three();
    auto c = column(m, "p1");
    EXPECT_EQ(c.param_id, "p1");
    EXPECT_EQ(std::vector<double>(c.samples.begin(), c.samples.end()), (std::vector<double>{0, 0, 5}));
    EXPECT_EQ(code_of([&] { column(m, "zz"); }), Errc::UnknownParam);
}

TEST(Column, SingleLotMatrix) {
    auto m = parse("lot,p\nA,3\n");
    EXPECT_EQ(column(m, "p").size(), 1u);
}

TEST(Restrict, KeepsOriginalOrderAndIsIdempotent) {
    auto m = three_by_three();
    EXPECT_EQ(restrict(m, {"p1", "p2", "p3"}), m);
    auto one = restrict(m, {"p2"});
    EXPECT_EQ(one.param_ids(), (std::vector<std::string>{"p2"}));
    EXPECT_EQ(one.value(2, 0), 5.0);
    auto two = restrict(m, {"p3", "p1"});
    EXPECT_EQ(two.param_ids(), (std::vector<std::string>{"p1", "p3"}));
    EXPECT_EQ(restrict(two, {"p3", "p1"}), two);
    EXPECT_EQ(two.lot_ids(), m.lot_ids());
}

TEST(Restrict, Errors) {
    auto m = three_by_three();
    EXPECT_EQ(code_of([&] { restrict(m, {}); }), Errc::EmptySelection);
    EXPECT_EQ(code_of([&] { restrict(m, {"nope"}); }), Errc::UnknownParam);
}

TEST(Labels, ParseAndCheck) {
    std::istringstream in("lot,label\nA,GOOD\nB,BAD\n");
    auto labels = parse_labels(in);
    EXPECT_EQ(labels.bad_lots(), (std::set<std::string>{"B"}));
    auto m = three_by_three();
    EXPECT_NO_THROW(labels.check_against(m));
    labels.set("Z", Label::Bad);
    EXPECT_EQ(code_of([&] { labels.check_against(m); }), Errc::MissingLabels);
    std::istringstream bad("lot,label\nA,MAYBE\n");
    EXPECT_EQ(code_of([&] { parse_labels(bad); }), Errc::MalformedCsv);
}
