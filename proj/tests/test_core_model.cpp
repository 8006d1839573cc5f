#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "hybridnet/core_model.hpp"
#include "hybridnet/scenarios.hpp"

using namespace hybridnet;
using namespace hybridnet::model;
using doctest::Approx;

namespace {

NetworkParams ir780() { return scenarios::ir780().params; }
NetworkParams cband() { return scenarios::cband().params; }

// Random parameter sets covering the whole valid domain, p_flag > 0.
NetworkParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto prob = [&] { return 0.001 + 0.999 * unit(rng); };
    NetworkParams p;
    p.r_max = std::pow(10.0, 4.0 + 4.0 * unit(rng));
    p.t_nd = 1e-5 * unit(rng);
    p.refractive_index = 1.0 + unit(rng);
    p.attenuation = 5.0 * unit(rng);
    p.p_p = prob();
    p.p_q = prob();
    p.p_d = prob();
    p.p_nd = prob();
    p.e_s = prob();
    p.gamma_nd = prob();
    p.y = static_cast<int>(rng() % 4);
    p.n = p.y == 0 ? 0 : static_cast<int>(rng() % static_cast<unsigned>(p.y + 1));
    p.z = static_cast<int>(rng() % 4);
    if (unit(rng) < 0.5) p.tau = std::pow(10.0, -7.0 + 5.0 * unit(rng));
    return p;
}

}  // namespace

TEST_SUITE("params") {
    TEST_CASE("table defaults validate") {
        CHECK_NOTHROW(validate(NetworkParams{}));
        CHECK_NOTHROW(validate(cband()));
    }

    TEST_CASE("invalid fields are rejected") {
        auto bad = [](auto mutate) {
            NetworkParams p;
            mutate(p);
            return p;
        };
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.p_p = 1.5; })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.p_d = -0.1; })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.e_s = std::nan(""); })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.r_max = 0.0; })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.t_nd = -1e-6; })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.refractive_index = 0.9; })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.attenuation = -1.0; })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.n = 2; })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.z = -1; })), DomainError);
        CHECK_THROWS_AS(validate(bad([](auto& p) { p.tau = 0.0; })), DomainError);
    }

    TEST_CASE("protocol names") {
        for (const Protocol p : kAllProtocols) CHECK(parse_protocol(to_string(p)) == p);
        CHECK(parse_protocol("ndspm-storage") == Protocol::NdspmStorage);
        CHECK_THROWS_AS(parse_protocol("repeater"), std::invalid_argument);
    }
}

TEST_SUITE("baseline") {
    TEST_CASE("travel_time") {
        NetworkParams p;
        CHECK(travel_time(0.0, p) == 0.0);
        CHECK(travel_time(50.0, p) == Approx(2.3349486663870643e-4).epsilon(1e-12));
        p.refractive_index = 1.0;
        CHECK(travel_time(1.0, p) == Approx(3.3356409519815205e-6).epsilon(1e-12));
        CHECK_THROWS_AS(travel_time(-1.0, p), DomainError);
    }

    TEST_CASE("fiber_transmission") {
        CHECK(fiber_transmission(0.0, 3.0) == 1.0);
        CHECK(fiber_transmission(1.0, 3.0) == Approx(0.501187).epsilon(1e-5));
        CHECK(fiber_transmission(20.0, 0.15) == Approx(0.5011872336272722).epsilon(1e-12));
        CHECK_THROWS_AS(fiber_transmission(-2.0, 0.15), DomainError);
        CHECK_THROWS_AS(fiber_transmission(2.0, -0.15), DomainError);
    }

    TEST_CASE("request_rate_base") {
        CHECK(request_rate_base(0.0, ir780()) == 2.0e6);
        CHECK(request_rate_base(1.0, ir780()) == Approx(107068.735).epsilon(1e-8));
        CHECK(request_rate_base(50.0, ir780()) == Approx(2141.3747).epsilon(1e-7));
    }

    TEST_CASE("p_bsa") {
        CHECK(p_bsa(0.0, ir780()) == Approx(0.0288).epsilon(1e-12));
        CHECK(p_bsa(0.0, cband()) == Approx(0.01728).epsilon(1e-12));
        auto dark = ir780();
        dark.p_p = 0.0;
        CHECK(p_bsa(3.0, dark) == 0.0);
    }

    TEST_CASE("rate_base") {
        CHECK(rate_base(0.0, ir780()) == Approx(829.44).epsilon(1e-12));
        CHECK(rate_base(0.0, cband()) == Approx(298.5984).epsilon(1e-12));
        auto blind = cband();
        blind.p_d = 0.0;
        CHECK(rate_base(7.0, blind) == 0.0);
    }
}

TEST_SUITE("ndspm") {
    TEST_CASE("p_flag") {
        CHECK(p_flag(ir780()) == Approx(0.027).epsilon(1e-12));
        NetworkParams lossless;
        lossless.p_nd = 1.0;
        lossless.p_q = 1.0;
        lossless.n = 0;
        CHECK(p_flag(lossless) == lossless.p_p);
        lossless.p_p = 0.0;
        CHECK(p_flag(lossless) == 0.0);
    }

    TEST_CASE("cycle_period") {
        CHECK(cycle_period(ir780()) == Approx(1.5e-6).epsilon(1e-12));
        NetworkParams p;
        p.t_nd = 0.0;
        CHECK(cycle_period(p) == 1.0 / p.r_max);
        p.r_max = 1e6;
        p.t_nd = 1e-6;
        CHECK(cycle_period(p) == Approx(2e-6).epsilon(1e-12));
    }

    TEST_CASE("request_rate_ndspm") {
        auto always = ir780();
        always.p_p = always.p_q = always.p_nd = 1.0;
        CHECK(request_rate_ndspm(3.0, always) == Approx(1.0 / (2.0 * travel_time(3.0, always))));
        auto never = ir780();
        never.p_nd = 0.0;
        CHECK(request_rate_ndspm(3.0, never) == Approx(1.0 / cycle_period(never)));
        // Direct evaluation: 1 / (0.027 * 2 t_n(1 km) + 0.973 * 1.5 us).
        CHECK(request_rate_ndspm(1.0, ir780()) == Approx(584223.2420495044).epsilon(1e-10));

        never.t_nd = 0.0;
        never.r_max = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(request_rate_ndspm(Link{1.0, 0.0}, never), DomainError);
    }

    TEST_CASE("alpha") {
        CHECK(alpha(0.0, ir780()) == 1.0);
        CHECK(alpha(1.0, ir780()) == Approx(0.8560791392029351).epsilon(1e-10));
        CHECK(alpha(1.0e6, ir780()) < 1e-4);
        auto dark = ir780();
        dark.p_nd = 0.0;
        CHECK_THROWS_AS(alpha(1.0, dark), DomainError);
    }

    TEST_CASE("rate_ndspm") {
        // Verbatim: alpha(0) = 1, r'(0) = 1 / ((1 - p) T).
        CHECK(rate_ndspm(0.0, ir780()) == Approx(159.83556012332994).epsilon(1e-10));
        auto blind = ir780();
        blind.p_nd = 0.0;
        CHECK_THROWS_AS(rate_ndspm(0.0, blind), DomainError);
        auto opaque = ir780();
        opaque.gamma_nd = 0.0;
        CHECK(rate_ndspm(2.0, opaque) == 0.0);
        CHECK(rate_ndspm(10.0, cband()) == Approx(3.9431012345871657).epsilon(1e-10));
    }
}

TEST_SUITE("storage") {
    TEST_CASE("t_star") {
        auto sure = ir780();
        sure.p_p = sure.p_q = sure.p_nd = 1.0;
        CHECK(t_star(0.0, sure) == Approx(cycle_period(sure)).epsilon(1e-15));
        CHECK(t_star(0.0, ir780()) == Approx(8.295320155431663e-5).epsilon(1e-12));

        auto half = ir780();
        half.p_p = 0.5;
        half.p_q = half.p_nd = 1.0;
        CHECK(t_star(0.0, half) == Approx(2.0 / 0.75 * cycle_period(half)).epsilon(1e-14));
    }

    TEST_CASE("rate_storage") {
        CHECK(rate_storage(0.0, ir780()) == Approx(3857.5967413441954).epsilon(1e-10));
        CHECK(rate_storage(0.0, cband()) == Approx(499.94453767820755).epsilon(1e-10));
        auto leaky = ir780();
        leaky.e_s = 0.0;
        CHECK(rate_storage(1.0, leaky) == 0.0);
    }

    TEST_CASE("beta") {
        const double period = 1.5e-6;
        CHECK(beta(0.3, period, std::nullopt) == 1.0);
        CHECK(beta(0.027, period, 1000.0 * period) == Approx(0.9647574660404246).epsilon(1e-10));
        CHECK(beta(0.027, period, 1e-300) == Approx(0.027 / 1.973).epsilon(1e-12));
        CHECK(beta(0.027, period, 1e300) == Approx(1.0).epsilon(1e-15));
        CHECK_THROWS_AS(beta(0.0, period, 1.0), DomainError);
        CHECK_THROWS_AS(beta(0.5, period, -1.0), DomainError);

        auto p = ir780();
        CHECK(beta(p) == 1.0);
        p.tau = 1000.0 * cycle_period(p);
        CHECK(beta(p) == Approx(0.9647574660404246).epsilon(1e-10));
    }

    TEST_CASE("rate_storage_finite") {
        auto p = ir780();
        CHECK(rate_storage_finite(0.0, p) == rate_storage(0.0, p));
        p.tau = 1000.0 * cycle_period(p);
        CHECK(rate_storage_finite(0.0, p) == Approx(3721.645257185025).epsilon(1e-10));
        CHECK(rate(Protocol::NdspmStorage, 0.0, p) == rate_storage_finite(0.0, p));
    }

    TEST_CASE("delay_distribution") {
        CHECK(delay_distribution(1.0, 0, DelayDirection::After) == 1.0);
        CHECK(delay_distribution(0.5, 0, DelayDirection::After) == Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(delay_distribution(0.5, 1, DelayDirection::Before) == Approx(1.0 / 6.0).epsilon(1e-15));
        CHECK(delay_distribution(1.0, 3, DelayDirection::Before) == 0.0);
        CHECK_THROWS_AS(delay_distribution(0.5, 0, DelayDirection::Before), DomainError);
        CHECK_THROWS_AS(delay_distribution(0.5, -1, DelayDirection::After), DomainError);
        CHECK_THROWS_AS(delay_distribution(0.0, 1, DelayDirection::After), DomainError);
    }
}

TEST_SUITE("case study") {
    TEST_CASE("asymptotic_ratio") {
        CHECK(asymptotic_ratio(ir780(), Protocol::NdspmStorage) ==
              Approx(771.604938271605).epsilon(1e-12));
        CHECK(asymptotic_ratio(cband(), Protocol::NdspmStorage) ==
              Approx(277.7777777777778).epsilon(1e-12));
        NetworkParams unity;
        unity.gamma_nd = unity.e_s = unity.p_p = unity.p_q = 1.0;
        CHECK(asymptotic_ratio(unity, Protocol::NdspmStorage) == 1.0);
        CHECK(asymptotic_ratio(unity, Protocol::Baseline) == 1.0);
        CHECK(asymptotic_ratio(unity, Protocol::Ndspm) == 0.0);
        unity.p_p = 0.0;
        CHECK_THROWS_AS(asymptotic_ratio(unity, Protocol::NdspmStorage), DomainError);
    }

    TEST_CASE("storage ratio tends to its asymptote") {
        for (const auto& params : {ir780(), cband()}) {
            const double limit = asymptotic_ratio(params, Protocol::NdspmStorage);
            double previous_gap = std::numeric_limits<double>::infinity();
            // Transmission cancels in the ratio; holding it at one keeps P_f^2
            // representable at lengths where it would underflow.
            for (double length : {100.0, 1000.0, 1.0e4, 1.0e5}) {
                const Link link{1.0, 2.0 * travel_time(length, params)};
                const double ratio = rate_storage(link, params) / rate_base(link, params);
                const double gap = std::abs(ratio / limit - 1.0);
                CHECK(gap < previous_gap);
                previous_gap = gap;
            }
            CHECK(previous_gap < 1e-4);
        }
    }

    TEST_CASE("ndspm_breakeven_length") {
        const double length = ndspm_breakeven_length(ir780());
        CHECK(length == Approx(123.92214699074076).epsilon(1e-10));

        // Scaling P_nd alone scales p by the same factor, so the break-even point does not move.
        auto doubled = ir780();
        doubled.p_nd = 0.375;
        CHECK(ndspm_breakeven_length(doubled) == Approx(length).epsilon(1e-12));

        // Double P_nd with p held fixed (compensate in p_p): L quadruples.
        auto quad = ir780();
        quad.p_nd = 1.0;
        quad.p_p = 0.06 * 0.75 / 1.0;
        const double base = ndspm_breakeven_length(quad);
        quad.p_nd = 0.5;
        quad.p_p = 0.06 * 0.75 / 0.5;
        CHECK(base == Approx(4.0 * ndspm_breakeven_length(quad)).epsilon(1e-12));

        const double ratio = rate_ndspm(length, ir780()) / rate_base(length, ir780());
        CHECK(std::abs(ratio - 1.0) < 0.1);

        auto dark = ir780();
        dark.p_p = 0.0;
        CHECK_THROWS_AS(ndspm_breakeven_length(dark), DomainError);
    }

    TEST_CASE("derive collects the intermediates") {
        auto p = ir780();
        p.tau = 100.0 * cycle_period(p);
        const auto d = derive(1.0, p);
        CHECK(d.t_n == travel_time(1.0, p));
        CHECK(d.p_f == fiber_transmission(1.0, 3.0));
        CHECK(d.p_b == p_bsa(1.0, p));
        CHECK(d.p_flag == p_flag(p));
        CHECK(d.cycle_period == cycle_period(p));
        CHECK(d.alpha == alpha(1.0, p));
        CHECK(d.t_star == t_star(1.0, p));
        CHECK(d.beta == beta(p));
    }
}

TEST_SUITE("properties") {
    TEST_CASE("outputs stay in range for random valid parameters") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 2000; ++trial) {
            const NetworkParams p = random_params(rng);
            const double length = 200.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const auto d = derive(length, p);
            for (double prob : {d.p_f, d.p_b, d.p_flag, d.alpha}) {
                CHECK(prob >= 0.0);
                CHECK(prob <= 1.0);
            }
            CHECK(d.beta > 0.0);
            CHECK(d.beta <= 1.0);
            CHECK(d.t_n >= 0.0);
            CHECK(d.t_star >= 0.0);
            for (const Protocol protocol : kAllProtocols) {
                const double r = rate(protocol, length, p);
                CHECK(std::isfinite(r));
                CHECK(r >= 0.0);
            }
        }
    }

    TEST_CASE("rates never increase with length") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            const NetworkParams p = trial < 2 ? (trial ? cband() : ir780()) : random_params(rng);
            for (const Protocol protocol : kAllProtocols) {
                double previous = rate(protocol, 0.0, p);
                for (int i = 1; i <= 200; ++i) {
                    const double current = rate(protocol, 0.25 * i, p);
                    CHECK(current <= previous);
                    previous = current;
                }
            }
        }
    }

    TEST_CASE("T* - 2 t_n lies between T/p and 2T/p") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 5000; ++trial) {
            NetworkParams p = ir780();
            p.p_p = trial == 0 ? 1.0 : 1e-4 + (1.0 - 1e-4) * unit(rng);
            p.p_q = p.p_nd = 1.0;
            const double length = 100.0 * unit(rng);
            const double period = cycle_period(p);
            const double prob = p_flag(p);
            const double waiting = t_star(length, p) - 2.0 * travel_time(length, p);
            CHECK(waiting >= period / prob * (1.0 - 1e-12));
            CHECK(waiting <= 2.0 * period / prob * (1.0 + 1e-12));
        }
    }

    TEST_CASE("beta is non-decreasing in tau and below 1 for finite tau") {
        for (double p : {0.005, 0.027, 0.1, 0.5, 0.9}) {
            double previous = 0.0;
            for (int k = -40; k <= 80; ++k) {
                const double b = beta(p, 1.5e-6, 1.5e-6 * std::pow(10.0, k / 10.0));
                CHECK(b >= previous);
                CHECK(b < 1.0);
                previous = b;
            }
        }
        // p = 1: both flags always land on the same cycle, so storage never waits.
        CHECK(beta(1.0, 1.5e-6, 1.5e-6) == 1.0);
    }
}
