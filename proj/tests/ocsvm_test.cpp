#include "ocfs/model_io.hpp"
#include "ocfs/ocsvm.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace ocfs;

namespace {

DataMatrix from_points(const std::vector<std::vector<double>>& pts) {
    std::vector<std::string> lots, params;
    for (std::size_t i = 0; i < pts.size(); ++i) lots.push_back("L" + std::to_string(i));
    for (std::size_t j = 0; j < pts[0].size(); ++j) params.push_back("p" + std::to_string(j));
    Matrix rows(pts.size(), pts[0].size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts[0].size(); ++j) rows(i, j) = pts[i][j];
    return DataMatrix::from_rows(lots, params, rows);
}

void expect_feasible(const OcSvmModel& m) {
    const double cap = 1.0 / (m.nu * static_cast<double>(m.alphas.size()));
    double sum = 0.0;
    for (double a : m.alphas) {
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, cap + kEqualityTolerance);
        sum += a;
    }
    EXPECT_NEAR(sum, 1.0, kEqualityTolerance);
    for (std::size_t i = 0; i < m.alphas.size(); ++i) {
        const bool sv = std::find(m.support_indices.begin(), m.support_indices.end(), i) != m.support_indices.end();
        EXPECT_EQ(sv, m.alphas[i] > kSupportThreshold);
    }
    EXPECT_EQ(m.train_refs.cols(), m.feature_ids.size());
    EXPECT_EQ(m.train_refs.rows(), m.support_indices.size());
}

}  // namespace

TEST(SolveDual, TwoIdenticalPointsGetEqualWeight) {
    for (auto kernel : {KernelSpec::linear(), KernelSpec::rbf_auto()}) {
        auto m = from_points({{1.0, 2.0}, {1.0, 2.0}});
        auto res = train(m, {.nu = 0.5, .kernel = kernel});
        EXPECT_NEAR(res.model.alphas[0], 0.5, 1e-12);
        EXPECT_NEAR(res.model.alphas[1], 0.5, 1e-12);
        EXPECT_TRUE(res.report.converged);
    }
}

TEST(SolveDual, TwoIdenticalPointsLinearDecisionIsZero) {
    auto m = from_points({{1.0, 2.0}, {1.0, 2.0}});
    auto res = train(m, {.nu = 0.5, .kernel = KernelSpec::linear()});
    const std::vector<double> x{1.0, 2.0};
    EXPECT_NEAR(decision(res.model, x), 0.0, 1e-12);
}

TEST(SolveDual, MatchesProjectedGradientOracle) {
    auto pts = oracle::gaussian_points(12, 3, 42);
    const Matrix q = oracle::rbf_gram(pts, 0.25);
    auto sol = solve_dual(q, 0.5, 1e-9, 10'000'000);
    auto ref = oracle::projected_gradient_dual(q, 0.5, 20000);
    EXPECT_NEAR(dual_objective(q, sol.alpha), oracle::quad_form(q, ref), 1e-6);
    EXPECT_LE(dual_objective(q, sol.alpha), oracle::quad_form(q, ref) + 1e-12);
    EXPECT_TRUE(sol.report.converged);
}

TEST(SolveDual, ObjectiveReportMatchesQuadraticForm) {
    auto pts = oracle::gaussian_points(15, 2, 3);
    const Matrix q = oracle::rbf_gram(pts, 0.5);
    auto sol = solve_dual(q, 0.2, 1e-8, 1'000'000);
    EXPECT_NEAR(sol.report.objective, oracle::quad_form(q, sol.alpha), 1e-12);
    EXPECT_LE(sol.report.max_kkt_violation, 1e-8);
}

TEST(SolveDual, NonConvergenceIsReported) {
    auto pts = oracle::gaussian_points(30, 3, 8);
    const Matrix q = oracle::rbf_gram(pts, 0.5);
    auto sol = solve_dual(q, 0.1, 1e-12, 2);
    EXPECT_FALSE(sol.report.converged);
    EXPECT_EQ(sol.report.iterations, 2u);
    EXPECT_NEAR(std::accumulate(sol.alpha.begin(), sol.alpha.end(), 0.0), 1.0, 1e-12);
}

TEST(Train, Preconditions) {
    auto m = from_points({{1.0}, {2.0}, {3.0}});
    EXPECT_THROW(train(m, {.nu = 0.0}), Error);
    EXPECT_THROW(train(m, {.nu = 1.5}), Error);
    EXPECT_THROW(train(m, {.tol = 0.0}), Error);
    try {
        train(from_points({{1.0}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DegenerateData);
    }
}

TEST(Train, NuPropertyAndFeasibility) {
    for (double nu : {0.05, 0.1, 0.3}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto m = from_points(oracle::gaussian_points(200, 3, seed));
            auto res = train(m, {.nu = nu});
            ASSERT_TRUE(res.report.converged);
            expect_feasible(res.model);
            auto f = decision_all(res.model, m);
            const double n = 200.0;
            const auto outliers = std::count_if(f.begin(), f.end(), [](double v) { return v < -1e-6; });
            EXPECT_LE(outliers / n, nu + 2.0 / n);
            EXPECT_GE(res.model.n_support() / n, nu - 2.0 / n);
        }
    }
}

TEST(Decision, FreeSupportVectorsLieOnTheMargin) {
    auto m = from_points(oracle::gaussian_points(60, 2, 17));
    auto res = train(m, {.nu = 0.2, .tol = 1e-9});
    const double cap = 1.0 / (0.2 * 60.0);
    std::size_t free_svs = 0;
    for (std::size_t i = 0; i < 60; ++i) {
        const double a = res.model.alphas[i];
        if (a > 1e-9 && a < cap - 1e-9) {
            ++free_svs;
            EXPECT_LE(std::abs(decision(res.model, m.row(i))), 1e-6);
        }
    }
    EXPECT_GT(free_svs, 0u);
}

TEST(Decision, FarPointTendsToMinusRho) {
    auto m = from_points(oracle::gaussian_points(40, 2, 4));
    auto res = train(m);
    const std::vector<double> far{1e6, -1e6};
    EXPECT_NEAR(decision(res.model, far), -res.model.rho, 1e-12);
    EXPECT_THROW(decision(res.model, std::vector<double>{1.0}), Error);
}

TEST(Decision, PermutationInvariant) {
    auto pts = oracle::gaussian_points(50, 3, 21);
    auto a = train(from_points(pts), {.tol = 1e-10});
    std::reverse(pts.begin(), pts.end());
    auto b = train(from_points(pts), {.tol = 1e-10});
    for (const auto& x : oracle::gaussian_points(10, 3, 99))
        EXPECT_NEAR(decision(a.model, x), decision(b.model, x), 1e-6);
}

TEST(Train, DeterministicAndAutoGammaResolved) {
    auto m = from_points(oracle::gaussian_points(50, 4, 2));
    auto a = train(m);
    auto b = train(m);
    EXPECT_EQ(a.model, b.model);
    EXPECT_GT(a.model.kernel.gamma, 0.0);
}

TEST(PrimalWeights, DirectSum) {
    OcSvmModel m;
    m.kernel = KernelSpec::linear();
    m.nu = 1.0;
    m.alphas = {0.5, 0.5};
    m.support_indices = {0, 1};
    m.feature_ids = {"a", "b"};
    m.train_refs = Matrix(2, 2);
    m.train_refs(0, 0) = 1.0;
    m.train_refs(1, 1) = 1.0;
    auto pw = primal_weights(m);
    EXPECT_EQ(pw.w, (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(pw.w_sq, (std::vector<double>{0.25, 0.25}));
}

TEST(PrimalWeights, HandSumOnFivePoints) {
    auto m = from_points({{1, 0, 2}, {2, 0, 1}, {3, 0, 5}, {4, 0, 2}, {0.5, 0, 3}});
    auto res = train(m, {.nu = 0.5, .kernel = KernelSpec::linear()});
    auto pw = primal_weights(res.model);
    const auto& st = res.model.standardization;
    std::vector<double> w(3, 0.0);
    for (std::size_t i = 0; i < 5; ++i) {
        auto z = st.apply(m.row(i));
        for (std::size_t j = 0; j < 3; ++j) w[j] += res.model.alphas[i] * z[j];
    }
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(pw.w[j], w[j], 1e-12);
    EXPECT_EQ(pw.w[1], 0.0);
    auto crit = rfe_criteria(res.model);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(crit[j], pw.w_sq[j]);
}

TEST(RfeCriterion, RbfMatchesMatrixRebuild) {
    auto pts = oracle::gaussian_points(6, 3, 13);
    auto res = train(from_points(pts), {.nu = 0.5});
    const auto& model = res.model;
    const double gamma = model.kernel.gamma;
    std::vector<std::vector<double>> z;
    for (const auto& p : pts) z.push_back(model.standardization.apply(p));
    const double full = oracle::quad_form(oracle::rbf_gram(z, gamma), model.alphas);
    for (std::size_t j = 0; j < 3; ++j) {
        auto drop = z;
        for (auto& v : drop) v.erase(v.begin() + static_cast<std::ptrdiff_t>(j));
        const double reduced = oracle::quad_form(oracle::rbf_gram(drop, gamma), model.alphas);
        EXPECT_NEAR(rfe_criterion(model, j), reduced - full, 1e-12);
        EXPECT_GE(reduced - full, 0.0);
    }
}

TEST(RfeCriterion, ConstantFeatureIsZero) {
    auto pts = oracle::gaussian_points(20, 3, 6);
    for (auto& p : pts) p[1] = 4.0;
    auto res = train(from_points(pts));
    EXPECT_EQ(rfe_criterion(res.model, 1), 0.0);
    EXPECT_GT(rfe_criterion(res.model, 0), 0.0);
}

TEST(RfeCriterion, ThreadCountDoesNotChangeValues) {
    auto res = train(from_points(oracle::gaussian_points(80, 12, 9)));
    EXPECT_EQ(rfe_criteria(res.model, 1), rfe_criteria(res.model, 4));
}

TEST(ModelIo, RoundTripIsExact) {
    for (auto kernel : {KernelSpec::linear(), KernelSpec::rbf_auto(), KernelSpec::rbf(0.37)}) {
        auto res = train(from_points(oracle::gaussian_points(30, 3, 5)), {.nu = 0.3, .kernel = kernel});
        std::stringstream buf;
        write_model(buf, res.model);
        std::istringstream in(buf.str());
        auto back = read_model(in);
        EXPECT_EQ(back, res.model);
    }
}

TEST(ModelIo, RejectsGarbage) {
    std::istringstream in("not-a-model 1\n");
    try {
        read_model(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MalformedModel);
    }
    auto res = train(from_points(oracle::gaussian_points(10, 2, 5)));
    std::stringstream buf;
    write_model(buf, res.model);
    std::string text = buf.str();
    std::istringstream cut(text.substr(0, text.size() / 2));
    EXPECT_THROW(read_model(cut), Error);
}
