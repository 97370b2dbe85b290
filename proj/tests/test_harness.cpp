#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "speclp/corpus.hpp"
#include "speclp/scenario.hpp"

using namespace speclp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("speclp_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

} // namespace

TEST(Corpus, DeterministicPerSeed)
{
    const GridSpec g{2, 512, 32.0};
    for (auto kind : {CorpusKind::GaussianMix, CorpusKind::BandlimitedRandom}) {
        CorpusOptions opt;
        opt.kind = kind;
        opt.count = 4;
        const auto a = generate_corpus(99, g, opt), b = generate_corpus(99, g, opt), c = generate_corpus(100, g, opt);
        ASSERT_EQ(a.size(), 4u);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].field.values, b[i].field.values);
        EXPECT_NE(a[0].field.values, c[0].field.values);
    }
    CorpusOptions one;
    one.count = 1;
    EXPECT_EQ(generate_corpus(1, g, one).size(), 1u);
    one.count = 0;
    EXPECT_THROW(generate_corpus(1, g, one), ArgumentError);
}

TEST(Corpus, FieldsVanishNearTheBoundary)
{
    const GridSpec g{1, 1024, 32.0};
    for (auto kind : {CorpusKind::GaussianMix, CorpusKind::BandlimitedRandom, CorpusKind::Annulus})
        for (bool mean_removed : {false, true}) {
            CorpusOptions opt;
            opt.kind = kind;
            opt.count = 6;
            opt.mean_removed = mean_removed;
            for (const auto& e : generate_corpus(5, g, opt)) {
                double peak = 0.0, edge = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double v = std::abs(e.field.values[i]);
                    peak = std::max(peak, v);
                    if (std::abs(g.coordinate(i)[0]) > 0.9 * g.half_extent) edge = std::max(edge, v);
                    EXPECT_EQ(e.field.values[i].imag(), 0.0);
                }
                EXPECT_GT(peak, 1e-3);
                EXPECT_LT(edge, 1e-14) << to_string(kind) << " id " << e.id;
                if (mean_removed) {
                    Complex sum{};
                    for (const auto& v : e.field.values) sum += v;
                    EXPECT_LT(std::abs(sum) * g.cell_volume(), 1e-12 * peak * g.half_extent);
                }
            }
        }
}

TEST(Corpus, AnnulusConcentratesInShell)
{
    const GridSpec g{1, 1024, 64.0};
    CorpusOptions opt;
    opt.kind = CorpusKind::Annulus;
    opt.count = 3;
    opt.annulus_j = 3;
    for (const auto& e : generate_corpus(3, g, opt)) {
        const auto spec = forward_transform(e.field);
        double total = 0.0, shell = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double w = std::norm(spec.coeffs[i]);
            const double xi = norm(g.frequency(i), 1);
            total += w;
            if (xi >= std::pow(2.0, 2.9) && xi <= std::pow(2.0, 3.1)) shell += w;
        }
        EXPECT_GE(shell / total, 0.999);
    }
    opt.annulus_j = 5; // 32 + margin > Nyquist/2
    EXPECT_THROW(generate_corpus(3, g, opt), ConfigError);
    opt.annulus_j = 3;
    EXPECT_THROW(generate_corpus(3, GridSpec{1, 1024, 16.0}, opt), ConfigError); // box too small
}

TEST(Corpus, KindNames)
{
    for (auto k : {CorpusKind::GaussianMix, CorpusKind::BandlimitedRandom, CorpusKind::Annulus})
        EXPECT_EQ(corpus_kind_from_string(to_string(k)), k);
    EXPECT_THROW(corpus_kind_from_string("WHITE_NOISE"), ConfigError);
    EXPECT_THROW(generate_corpus(1, GridSpec{1, 16, 32.0}, CorpusOptions{}), ConfigError);
}

TEST(Config, ParsesKeysAndComments)
{
    const auto c = parse("# header\n"
                         "scenario = kernel-decay\n"
                         "psi1 = poisson   # trailing\n"
                         "psi2 = heat\n"
                         "dim = 2\nn = 128\nL = 16\n"
                         "a = inf\n"
                         "corpus.kind = ANNULUS\ncorpus.annulus_j = 2\ncorpus.mean_removed = true\n"
                         "t_list = 1, 2, 4\n");
    EXPECT_EQ(c.scenario, Scenario::KernelDecay);
    EXPECT_EQ(c.psi1, "poisson");
    EXPECT_EQ(c.grid.dim, 2);
    EXPECT_EQ(c.grid.n, 128);
    EXPECT_DOUBLE_EQ(c.grid.half_extent, 16.0);
    EXPECT_TRUE(std::isinf(c.a));
    EXPECT_EQ(c.corpus.kind, CorpusKind::Annulus);
    EXPECT_EQ(c.corpus.annulus_j.value(), 2);
    EXPECT_TRUE(c.corpus.mean_removed);
    EXPECT_EQ(c.t_list, (std::vector<double>{1.0, 2.0, 4.0}));
}

TEST(Config, RejectsMalformedInput)
{
    EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse("p = 2\np = 3\n"), ConfigError);
    EXPECT_THROW(parse("p 2\n"), ConfigError);
    EXPECT_THROW(parse("p = two\n"), ConfigError);
    EXPECT_THROW(parse("n = 12.5\n"), ConfigError);
    EXPECT_THROW(parse("scenario = NOPE\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/speclp.cfg"), ConfigError);
    EXPECT_THROW(check_config(parse("n = 101\n")), ConfigError); // odd
    EXPECT_THROW(check_config(parse("p = 0.5\n")), ConfigError);
    EXPECT_THROW(check_config(parse("psi2 = no-such-symbol\n")), Error);
    // The power-t generator does not stay homogeneous; q = 4 on an infinite window is not legal.
    EXPECT_THROW(check_config(parse("psi2 = power-t\nq = 4\na = inf\n")), ConfigError);
    EXPECT_EQ(scenario_from_string("gfun_ratio"), Scenario::GfunRatio);
    EXPECT_EQ(scenario_from_string("Dyadic-Envelope"), Scenario::DyadicEnvelope);
}

TEST(Scenario, GfunRatioHeatPlancherel)
{
    auto c = parse("scenario = GFUN_RATIO\nn = 512\nL = 16\ncorpus.count = 3\n");
    const auto dir = scratch("gfun");
    const auto r = run_scenario(c, dir);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.summary["max_ratio"].get<double>(), 0.5, 1e-3);
    EXPECT_EQ(r.summary["schema_version"].get<int>(), kSchemaVersion);
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    EXPECT_TRUE(fs::exists(dir / "ratios.csv"));
}

TEST(Scenario, AuditSymbolHeat)
{
    const auto r = run_scenario(parse("scenario = AUDIT_SYMBOL\nn = 64\nL = 8\n"), scratch("audit"));
    EXPECT_TRUE(r.pass);
    EXPECT_THROW(run_scenario(parse("scenario = REPRODUCE\n"), scratch("repro")), ConfigError);
}

TEST(Scenario, OutputsAreByteIdentical)
{
    const auto c = parse("scenario = LP_DECOMP\nn = 256\nL = 16\ncorpus.count = 2\nseed = 11\n");
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    run_scenario(c, d1);
    run_scenario(c, d2);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(d1)) {
        const auto other = d2 / entry.path().filename();
        ASSERT_TRUE(fs::exists(other)) << other;
        EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
        ++compared;
    }
    EXPECT_GE(compared, 2u);
}

namespace {

int run_cli(const std::string& args)
{
    const char* cli = std::getenv("SPECLP_CLI");
    if (!cli) return -1;
    const int raw = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -2;
}

} // namespace

TEST(Cli, ExitCodes)
{
    if (!std::getenv("SPECLP_CLI")) GTEST_SKIP() << "SPECLP_CLI not set";
    const auto dir = scratch("cli");
    {
        std::ofstream(dir / "ok.cfg") << "psi1 = heat\npsi2 = heat\nn = 64\nL = 8\n";
        std::ofstream(dir / "bad.cfg") << "colour = blue\n";
    }
    EXPECT_EQ(run_cli("audit_symbol --config " + (dir / "ok.cfg").string() + " --out " + (dir / "out").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));
    EXPECT_EQ(run_cli("audit_symbol --config " + (dir / "bad.cfg").string()), 2);
    EXPECT_EQ(run_cli("audit_symbol"), 2);
    EXPECT_EQ(run_cli("no_such_scenario --config " + (dir / "ok.cfg").string()), 2);
    EXPECT_NE(run_cli("--bogus-flag"), 0);
}

TEST(Cli, ShippedConfigsAreValid)
{
    const char* dir = std::getenv("SPECLP_CONFIG_DIR");
    if (!dir) GTEST_SKIP() << "SPECLP_CONFIG_DIR not set";
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".cfg") continue;
        auto c = load_config(entry.path().string());
        c.scenario = scenario_from_string(entry.path().stem().string());
        EXPECT_NO_THROW(check_config(c)) << entry.path();
        ++seen;
    }
    EXPECT_EQ(seen, scenario_names().size() - 1); // every scenario but REPRODUCE
}
