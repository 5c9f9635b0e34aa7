#include <catch_amalgamated.hpp>

#include <hkc/io.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

using namespace hkc;
using Catch::Matchers::WithinRel;

namespace {

const double K1 = 1 / std::sqrt(2.0);

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("number formatting round-trips")
{
    for (double v : {0.1, 1.0 / 3, -2.5e-300, 6.75, 1e16})
        CHECK(std::stod(io::fmt(v)) == v);
}

TEST_CASE("spec JSON round trip")
{
    for (int M : {1, 3, 10}) {
        const auto s = build_hkc(M);
        const auto j = io::to_json(s);
        CHECK(j["M"] == M);
        CHECK(j["layout"].size() == s.dimension());
        CHECK(j["layout"][0]["slot"] == 0);
        const auto back = io::spec_from_json(io::ordered_json::parse(j.dump()));
        CHECK(back.M == M);
        CHECK(back.layout == s.layout);
    }
    auto j = io::to_json(build_hkc(1));
    j["layout"][0]["p1"] = 3 - j["layout"][0]["p1"].get<int>();
    CHECK_THROWS_AS(io::spec_from_json(j), std::invalid_argument);
    j = io::to_json(build_hkc(1));
    j["layout"].erase(0);
    CHECK_THROWS_AS(io::spec_from_json(j), std::invalid_argument);
    j = io::to_json(build_hkc(1));
    j.erase("layout");
    CHECK(io::spec_from_json(j).dimension() == 6);

    const std::string path = "io_spec_roundtrip.json";
    io::write_spec(build_hkc(3), path);
    CHECK(io::read_spec(path).layout == build_hkc(3).layout);
    std::remove(path.c_str());
    CHECK_THROWS(io::read_spec("does/not/exist.json"));
}

TEST_CASE("trajectory CSV round trip")
{
    const auto spec = build_hkc(3);
    Trajectory tr;
    for (int i = 0; i < 4; ++i) {
        tr.times.push_back(0.1 * i);
        tr.states.push_back(State::LinSpaced(Eigen::Index(spec.dimension()), -1.0 / 3, 2.0 / 7 + i));
    }
    std::stringstream ss;
    ss << "# banner line\n";
    io::write_trajectory_csv(spec, tr, ss);
    const auto header = lines(ss.str())[1];
    CHECK(header.rfind("t,u_0_1,u_1_1,", 0) == 0);

    const auto lt = io::read_trajectory_csv(ss);
    CHECK(lt.traj.times == tr.times);
    for (std::size_t i = 0; i < tr.states.size(); ++i) CHECK((lt.traj.states[i] - tr.states[i]).norm() == 0.0);
    CHECK(io::spec_from_labels(lt.labels).layout == spec.layout);

    std::stringstream ragged("t,u_1_1\n0,1,2\n");
    CHECK_THROWS_AS(io::read_trajectory_csv(ragged), std::invalid_argument);
    std::stringstream noheader("0,1\n");
    CHECK_THROWS_AS(io::read_trajectory_csv(noheader), std::invalid_argument);
    std::stringstream empty("# only a banner\n");
    CHECK_THROWS_AS(io::read_trajectory_csv(empty), std::invalid_argument);
    CHECK_THROWS_AS(io::spec_from_labels({"th_0_2", "u_1_1"}), std::invalid_argument);
    CHECK_THROWS_AS(io::spec_from_labels({"q_1_1"}), std::invalid_argument);
}

TEST_CASE("diagnostics CSV")
{
    const auto m = compile(build_hkc(1), Params(100, 0, 10, K1));
    Trajectory tr;
    State x = State::Zero(6);
    for (int i = 0; i < 3; ++i) {
        tr.times.push_back(i);
        tr.states.push_back(x);
    }
    std::ostringstream os;
    io::write_diagnostics_csv(m, tr, os);
    const auto l = lines(os.str());
    REQUIRE(l.size() == 4);
    CHECK(l[0] == io::diagnostics_header());
    CHECK(l[3] == "2,0,0,0,0,1,0,0,0,0,0");
}

TEST_CASE("coefficient dump")
{
    const auto d = io::coefficient_dump(compile(build_hkc(1), Params(100, 0, 10, K1)));
    REQUIRE(d.size() == 2);
    CHECK(d[0]["adv"] == "u_1_1");
    CHECK_THAT(std::abs(d[0]["value"].get<double>()), WithinRel(0.15453, 1e-4));
}

TEST_CASE("stability atlas")
{
    std::ostringstream os;
    io::write_stability_atlas(Params(10, 0, 10, K1), 4, os);
    const auto l = lines(os.str());
    REQUIRE(l.size() == 1 + 1 + 2 + 3);
    CHECK(l[0] == "m1,m3,R1,R2,Rc,S_threshold,crossing_type,n_unstable");
    CHECK(l[1].rfind("1,1,6.75,", 0) == 0);
    CHECK(l[1].substr(l[1].size() - 2) == ",1");
}
