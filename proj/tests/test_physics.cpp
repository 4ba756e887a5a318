#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <cmath>
#include <set>
#include <sstream>

#include "hyperfc/disturbances/delay.hpp"
#include "hyperfc/disturbances/perturbation.hpp"
#include "hyperfc/disturbances/sensors.hpp"
#include "hyperfc/disturbances/wind.hpp"
#include "hyperfc/dynamics/actuators.hpp"
#include "hyperfc/dynamics/equations.hpp"
#include "hyperfc/reference/path.hpp"
#include "hyperfc/reference/trim.hpp"

using namespace hyperfc;

namespace {

constexpr double kG = 9.81;

AirframeParams aero_off() {
    AirframeParams ap;
    ap.area = 1e-300;  // geometric quantities must stay positive; loads vanish
    return ap;
}

// Vehicle at rest in a 10 m/s headwind so the airspeed floor is respected.
AircraftState at_rest() { return AircraftState{}; }
const Vec3 kHeadwind(-10.0, 0.0, 0.0);

// Stationary covariance from vec(P) = (I - Ad kron Ad)^-1 vec(Qd).
Eigen::MatrixXd lyapunov_oracle(const GustAxisFilter& f) {
    const Eigen::Index n = f.ad.rows();
    const Eigen::MatrixXd qd = f.noise_chol * f.noise_chol.transpose();
    const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n * n, n * n) - Eigen::kroneckerProduct(f.ad, f.ad);
    const Eigen::VectorXd vp = k.fullPivLu().solve(Eigen::Map<const Eigen::VectorXd>(qd.data(), n * n));
    return Eigen::Map<const Eigen::MatrixXd>(vp.data(), n, n);
}

}  // namespace

// ---------------------------------------------------------------- dynamics

TEST(AirRelativeVelocity, ZeroWindIsIdentity) {
    AircraftState s;
    s.velocity = Vec3(20.0, 1.0, -2.0);
    s.euler = Vec3(0.3, -0.2, 1.0);
    EXPECT_EQ(air_relative_velocity(s, Vec3::Zero()), s.velocity);
}

TEST(AirRelativeVelocity, LevelHeadwind) {
    AircraftState s;
    s.velocity = Vec3(20.0, 0.0, 0.0);
    EXPECT_TRUE(air_relative_velocity(s, Vec3(5.0, 0.0, 0.0)).isApprox(Vec3(15.0, 0.0, 0.0), 1e-15));
}

TEST(AirRelativeVelocity, YawedNinetyDegrees) {
    AircraftState s;
    s.velocity = Vec3(20.0, 0.0, 0.0);
    s.euler = Vec3(0.0, 0.0, kPi / 2);
    EXPECT_LT((air_relative_velocity(s, Vec3(0.0, 5.0, 0.0)) - Vec3(15.0, 0.0, 0.0)).norm(), 1e-14);
}

TEST(AeroAngles, Examples) {
    auto a = aero_angles(Vec3(20.0, 0.0, 0.0), 3.0);
    EXPECT_DOUBLE_EQ(a.airspeed, 20.0);
    EXPECT_DOUBLE_EQ(a.alpha, 0.0);
    EXPECT_DOUBLE_EQ(a.beta, 0.0);

    a = aero_angles(Vec3(20.0, 0.0, 20.0), 3.0);
    EXPECT_NEAR(a.airspeed, std::sqrt(800.0), 1e-13);
    EXPECT_NEAR(a.alpha, kPi / 4, 1e-15);

    a = aero_angles(Vec3(19.9, 2.0, 0.0), 3.0);
    EXPECT_NEAR(a.beta, std::asin(2.0 / std::hypot(19.9, 2.0)), 1e-15);
    EXPECT_NEAR(a.beta, 0.1002, 5e-5);
}

TEST(AeroAngles, BelowFloorThrows) {
    EXPECT_THROW(aero_angles(Vec3(2.0, 0.0, 0.0), 3.0), LowAirspeedError);
    EXPECT_THROW(aero_angles(Vec3::Zero(), 3.0), NumericError);
}

TEST(AeroCoefficients, DifferentialAileronPitch) {
    const AirframeParams ap;
    EXPECT_DOUBLE_EQ(ap.aero.pitch_da_diff, -0.02);
    const AirData air{21.0, 0.05, 0.01};
    const Vec3 rh(0.01, 0.02, -0.01);
    ActuatorOutputs zero;
    ActuatorOutputs sym = zero;
    sym.aileron_left = sym.aileron_right = 0.1;
    ActuatorOutputs asym = zero;
    asym.aileron_right = 0.1;
    asym.aileron_left = -0.1;
    const Coeff6 c0 = aero_coefficients(ap, air, rh, zero, Coeff6::Zero());
    const Coeff6 cs = aero_coefficients(ap, air, rh, sym, Coeff6::Zero());
    const Coeff6 ca = aero_coefficients(ap, air, rh, asym, Coeff6::Zero());
    EXPECT_EQ(cs[4], c0[4]);
    EXPECT_NEAR(ca[4] - c0[4], -0.004, 1e-15);
    // Effective deflection is zero in the asymmetric case: lateral channels unchanged.
    EXPECT_EQ(ca[3], c0[3]);
    EXPECT_EQ(ca[5], c0[5]);
}

TEST(AeroCoefficients, PerturbationIsAdditive) {
    const AirframeParams ap;
    const AirData air{21.0, 0.0, 0.0};
    Coeff6 d = Coeff6::Zero();
    d[0] = 0.01;
    const Coeff6 a = aero_coefficients(ap, air, Vec3::Zero(), {}, Coeff6::Zero());
    const Coeff6 b = aero_coefficients(ap, air, Vec3::Zero(), {}, d);
    EXPECT_NEAR(b[0], a[0] + 0.01, 1e-16);
    for (int i = 1; i < 6; ++i) EXPECT_EQ(b[i], a[i]);
}

TEST(AeroLoads, MatchCoefficientsAndScaleWithQbar) {
    const AirframeParams ap;
    AircraftState s;
    s.velocity = Vec3(21.0, 0.5, 1.0);
    s.rates = Vec3(0.1, -0.05, 0.02);
    s.delta = {0.02, -0.01, 0.03, 0.01, 90.0};
    const AeroOutputs o = compute_aero(ap, s, Vec3::Zero(), Coeff6::Zero());
    EXPECT_NEAR(o.qbar, 0.5 * ap.air_density * s.velocity.squaredNorm(), 1e-12);
    const double qs = o.qbar * ap.area;
    EXPECT_NEAR(o.force.x(), qs * o.coeffs[0], 1e-12);
    EXPECT_NEAR(o.force.y(), qs * o.coeffs[1], 1e-12);
    EXPECT_NEAR(o.force.z(), qs * o.coeffs[2], 1e-12);
    EXPECT_NEAR(o.moment.x(), qs * o.coeffs[3] * ap.span, 1e-12);
    EXPECT_NEAR(o.moment.y(), qs * o.coeffs[4] * ap.chord, 1e-12);
    EXPECT_NEAR(o.moment.z(), qs * o.coeffs[5] * ap.span, 1e-12);

    Vec3 f1, m1, f2, m2;
    coefficients_to_loads(ap, 100.0, o.coeffs, f1, m1);
    coefficients_to_loads(ap, 300.0, o.coeffs, f2, m2);
    EXPECT_LT((f2 - 3.0 * f1).norm(), 1e-10);
    EXPECT_LT((m2 - 3.0 * m1).norm(), 1e-10);
}

TEST(StateDerivative, GravityOnlyAtRest) {
    const AirframeParams ap = aero_off();
    const auto d = state_derivative(ap, at_rest(), kHeadwind, Coeff6::Zero());
    EXPECT_LT((d.velocity - Vec3(0.0, 0.0, kG)).norm(), 1e-12);
    EXPECT_LT(d.rates.norm(), 1e-12);
}

TEST(StateDerivative, KinematicIdentityAtZeroAttitude) {
    const AirframeParams ap;
    AircraftState s;
    s.velocity = Vec3(20.0, 1.0, 2.0);
    const auto d = state_derivative(ap, s, Vec3::Zero(), Coeff6::Zero());
    EXPECT_EQ(d.euler, Vec3::Zero());
    EXPECT_LT((d.position - s.velocity).norm(), 1e-15);
}

TEST(StateDerivative, TrimIsEquilibrium) {
    const AirframeParams ap;
    for (double k : {0.0, 0.012, -0.02}) {
        const TrimCondition t = solve_trim(ap, k, 0.11);
        const auto d = state_derivative(ap, t.state_at(Vec3::Zero(), 0.3), Vec3::Zero(), Coeff6::Zero());
        EXPECT_LT(d.velocity.norm() + d.rates.norm(), 1e-6) << "kappa " << k;
        // Euler rates reduce to the constant heading rate.
        EXPECT_NEAR(d.euler.x(), 0.0, 1e-6);
        EXPECT_NEAR(d.euler.y(), 0.0, 1e-6);
        EXPECT_NEAR(d.euler.z(), t.turn_rate, 1e-6);
    }
}

TEST(ActuatorStep, StuckRudderOverride) {
    const AirframeParams ap;
    const auto lam = FailureVector::stuck(FailActuator::Rudder, 0.5);
    for (double cmd : {-1.0, 0.0, 0.3, 2.0}) {
        CommandVector c(0.0, 0.0, cmd, 80.0);
        const auto out = actuator_step(ap, ActuatorOutputs{}, c, lam, 0.04);
        EXPECT_DOUBLE_EQ(out.rudder, 0.2);
        // Idempotent: a second step with the same lambda gives the same deflection.
        EXPECT_DOUBLE_EQ(actuator_step(ap, out, c, lam, 0.04).rudder, 0.2);
    }
}

TEST(ActuatorStep, StuckAileronIsPerSurface) {
    const AirframeParams ap;
    const auto lam = FailureVector::stuck(FailActuator::LeftAileron, -0.25);
    const auto out = actuator_step(ap, ActuatorOutputs{}, CommandVector(0.0, 0.3, 0.0, 0.0), lam, 0.04);
    EXPECT_DOUBLE_EQ(out.aileron_left, -0.1);
    EXPECT_NEAR(out.aileron_right, 0.3 * (1.0 - std::exp(-0.8)), 1e-15);
}

TEST(ActuatorStep, FirstOrderLag) {
    AirframeParams ap;
    ap.elevator_sat = 2.0;
    const auto out = actuator_step(ap, ActuatorOutputs{}, CommandVector(1.0, 0.0, 0.0, 0.0), {}, 0.04);
    EXPECT_NEAR(out.elevator, 1.0 - std::exp(-0.8), 1e-15);
    EXPECT_NEAR(out.elevator, 0.5507, 1e-4);
}

TEST(ActuatorStep, SaturatedTargetNeverExceeded) {
    const AirframeParams ap;
    ActuatorOutputs d;
    for (int i = 0; i < 200; ++i) {
        d = actuator_step(ap, d, CommandVector(5.0, -5.0, 5.0, 1e4), {}, 0.04);
        EXPECT_LE(d.elevator, ap.elevator_sat);
        EXPECT_GE(d.aileron_left, -ap.aileron_sat);
        EXPECT_LE(d.rudder, ap.rudder_sat);
        EXPECT_LE(d.throttle, ap.throttle_max);
    }
    EXPECT_NEAR(d.elevator, ap.elevator_sat, 1e-12);
}

TEST(Rk4, FreeFallIsExact) {
    AirframeParams ap = aero_off();
    const AircraftState s1 = rk4_step(ap, at_rest(), kHeadwind, Coeff6::Zero(), 0.04);
    EXPECT_NEAR(s1.velocity.z(), kG * 0.04, 1e-14);
    EXPECT_NEAR(s1.velocity.z(), 0.3924, 1e-12);
    EXPECT_NEAR(s1.position.z(), 0.5 * kG * 0.04 * 0.04, 1e-15);
}

TEST(Rk4, ZeroFieldIsFixedPoint) {
    AirframeParams ap = aero_off();
    ap.gravity = 1e-300;
    AircraftState s;
    s.position = Vec3(1.0, 2.0, -3.0);
    s.euler = Vec3(0.1, 0.2, 0.3);
    s.delta = {0.1, 0.1, 0.1, 0.1, 50.0};
    const AircraftState s1 = rk4_step(ap, s, kHeadwind, Coeff6::Zero(), 0.04);
    EXPECT_LT((s1.rigid_body() - s.rigid_body()).norm(), 1e-290);
    EXPECT_EQ(s1.delta, s.delta);
}

TEST(Rk4, FourthOrderConvergence) {
    const AirframeParams ap;
    const TrimCondition t = solve_trim(ap, 0.02, 0.0);
    // Trimmed turn, and the same segment started slightly off trim.
    for (double offset : {0.0, 0.01}) {
        AircraftState s0 = t.state_at(Vec3(0, 0, -100), 0.0);
        s0.rates += offset * Vec3(0.3, -0.2, 0.1);
        s0.velocity += offset * Vec3(1.0, 0.5, -0.5);
        auto run = [&](double dt) {
            AircraftState s = s0;
            const int n = static_cast<int>(std::lround(1.0 / dt));
            for (int i = 0; i < n; ++i) s = rk4_step(ap, s, Vec3::Zero(), Coeff6::Zero(), dt);
            return s.rigid_body();
        };
        const auto ref = run(0.04 / 16);
        const double e1 = (run(0.04) - ref).norm();
        const double e2 = (run(0.02) - ref).norm();
        const double e3 = (run(0.01) - ref).norm();
        EXPECT_GE(e1 / e2, 12.0) << offset;
        EXPECT_LE(e1 / e2, 20.0) << offset;
        EXPECT_GE(e2 / e3, 12.0) << offset;
        EXPECT_LE(e2 / e3, 20.0) << offset;
    }
}

TEST(Rk4, NonFiniteStateThrows) {
    const AirframeParams ap;
    AircraftState s;
    s.velocity = Vec3(21.0, 0.0, 0.0);
    s.rates = Vec3(std::nan(""), 0.0, 0.0);
    EXPECT_THROW(rk4_step(ap, s, Vec3::Zero(), Coeff6::Zero(), 0.04), NumericError);
}

TEST(PathAngles, Examples) {
    auto a = path_angles(Vec3(10, 0, 0));
    EXPECT_DOUBLE_EQ(a.gamma, 0.0);
    EXPECT_DOUBLE_EQ(a.chi, 0.0);
    a = path_angles(Vec3(0, 10, 0));
    EXPECT_DOUBLE_EQ(a.chi, kPi / 2);
    a = path_angles(Vec3(10, 0, -10));
    EXPECT_DOUBLE_EQ(a.gamma, kPi / 4);
    EXPECT_THROW(path_angles(Vec3::Zero()), NumericError);
}

TEST(EulerRateMatrix, WellConditionedAlongTrajectories) {
    const AirframeParams ap;
    for (double k : {0.0, 0.02}) {
        const TrimCondition t = solve_trim(ap, k, 0.21);
        AircraftState s = t.state_at(Vec3::Zero(), 0.0);
        for (int i = 0; i < 125; ++i) {
            s = rk4_step(ap, s, Vec3::Zero(), Coeff6::Zero(), 0.04);
            Eigen::JacobiSVD<Mat3> svd(euler_rate_matrix(s.euler.x(), s.euler.y()));
            const double cond = svd.singularValues()(0) / svd.singularValues()(2);
            ASSERT_TRUE(std::isfinite(cond));
            ASSERT_LT(cond, 1e3);
        }
    }
}

// ---------------------------------------------------------------- airframe file

TEST(Airframe, ShippedFileMatchesDefaults) {
    const AirframeParams file = load_airframe(std::string(HYPERFC_SOURCE_DIR) + "/data/airframe.cfg");
    std::ostringstream a, b;
    write_airframe(a, file);
    write_airframe(b, AirframeParams{});
    EXPECT_EQ(a.str(), b.str());
}

TEST(Airframe, RoundTripAndErrors) {
    AirframeParams p;
    p.mass = 3.25;
    p.aero.pitch_da_diff = -0.03;
    std::stringstream ss;
    write_airframe(ss, p);
    const AirframeParams q = parse_airframe(ss);
    EXPECT_EQ(q.mass, 3.25);
    EXPECT_EQ(q.aero.pitch_da_diff, -0.03);

    std::istringstream unknown("mass = 3\nwingspan = 2\n");
    EXPECT_THROW(parse_airframe(unknown), ConfigError);
    std::istringstream bad("mass = 3kg\n");
    EXPECT_THROW(parse_airframe(bad), ConfigError);
    std::istringstream neg("span = -1\n");
    EXPECT_THROW(parse_airframe(neg), ConfigError);
    std::istringstream jxz("jxz = 0.5\n");
    EXPECT_THROW(parse_airframe(jxz), ConfigError);
    EXPECT_THROW(load_airframe("/nonexistent/airframe.cfg"), IoError);
}

// ---------------------------------------------------------------- disturbances

TEST(SteadyWind, HorizontalBoundedUniformHeading) {
    Rng rng(42);
    std::array<int, 12> bins{};
    for (int i = 0; i < 10000; ++i) {
        const Vec3 w = sample_steady_wind(rng);
        const double m = w.head<2>().norm();
        ASSERT_GE(m, 3.0 - 1e-12);
        ASSERT_LE(m, 5.0 + 1e-12);
        ASSERT_EQ(w.z(), 0.0);
        double h = std::atan2(w.y(), w.x());
        if (h < 0) h += 2 * kPi;
        ++bins[std::min<std::size_t>(11, static_cast<std::size_t>(h / (2 * kPi) * 12))];
    }
    double chi2 = 0.0;
    for (int b : bins) chi2 += (b - 10000.0 / 12) * (b - 10000.0 / 12) / (10000.0 / 12);
    EXPECT_LT(chi2, 24.725);  // 1% critical value, 11 degrees of freedom
    Rng a(5), b(5);
    EXPECT_EQ(sample_steady_wind(a), sample_steady_wind(b));
}

TEST(Dryden, ZeroIntensityGivesNoGust) {
    DrydenConfig cfg;
    cfg.intensity_scale = 0.0;
    WindModel w(cfg, 0.04);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(w.dryden_step(rng, 0.3), Vec3::Zero());
}

TEST(Dryden, IntensityFollowsLowAltitudeRelations) {
    DrydenConfig cfg;  // 100 m, 30 kt
    const DrydenIntensity d = dryden_intensity(cfg);
    const double h = 100.0 / 0.3048;
    const double sw = 0.1 * 30.0 * 0.514444;
    const double suv = sw / std::pow(0.177 + 0.000823 * h, 0.4);
    EXPECT_NEAR(d.sigma.z(), sw, 1e-12);
    EXPECT_NEAR(d.sigma.x(), suv, 1e-12);
    EXPECT_NEAR(d.sigma.y(), suv, 1e-12);
    EXPECT_NEAR(d.scale.z(), 100.0, 1e-9);
    EXPECT_NEAR(d.scale.x(), h / std::pow(0.177 + 0.000823 * h, 1.2) * 0.3048, 1e-9);
}

TEST(Dryden, DiscreteStationaryVarianceEqualsSigmaSquared) {
    for (auto [f, sigma] : {std::pair{longitudinal_gust_filter(1.3, 200.0, 21.0, 0.04), 1.3},
                            std::pair{transverse_gust_filter(1.3, 200.0, 21.0, 0.04), 1.3},
                            std::pair{transverse_gust_filter(0.7, 30.0, 21.0, 0.04), 0.7}}) {
        const Eigen::MatrixXd p = lyapunov_oracle(f);
        EXPECT_NEAR((f.c * p * f.c.transpose())(0, 0), sigma * sigma, 1e-9);
        const Eigen::MatrixXd ps = f.stationary_chol * f.stationary_chol.transpose();
        EXPECT_LT((ps - p).norm(), 1e-9 * p.norm());
    }
}

TEST(Dryden, LongRunSampleVarianceMatchesAnalytic) {
    DrydenConfig cfg;
    WindModel w(cfg, 0.04);
    Rng rng(2024);
    w.reset_stationary(rng);
    const int n = 1000000;
    Vec3 sum = Vec3::Zero(), sq = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
        const Vec3 g = w.dryden_step(rng, 0.0);
        sum += g;
        sq += g.cwiseProduct(g);
    }
    const Vec3 mean = sum / n;
    const Vec3 var = sq / n - mean.cwiseProduct(mean);
    const Vec3 expect = w.intensity().sigma.cwiseProduct(w.intensity().sigma);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(var[a] / expect[a], 1.0, 0.10) << "axis " << a;
}

TEST(Dryden, ReproducibleAndContinuous) {
    DrydenConfig cfg;
    WindModel a(cfg, 0.04), b(cfg, 0.04);
    Rng ra(9), rb(9);
    a.reset_stationary(ra);
    b.reset_stationary(rb);
    Vec3 prev = Vec3::Zero();
    double max_jump = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const Vec3 ga = a.dryden_step(ra, 1.0);
        ASSERT_EQ(ga, b.dryden_step(rb, 1.0));
        if (i > 0) max_jump = std::max(max_jump, (ga - prev).norm());
        prev = ga;
    }
    // Increments are much smaller than the gust amplitude itself.
    EXPECT_LT(max_jump, 2.0 * a.intensity().sigma.maxCoeff());
}

TEST(Perturbation, ZeroBoundsStayZero) {
    CoeffPerturbation p;
    Rng rng(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(perturb_step(p, rng), Coeff6::Zero());
}

TEST(Perturbation, TraceRespectsBounds) {
    CoeffPerturbation p;
    p.magnitude.setConstant(0.05);
    p.rate.setConstant(0.01);
    Rng rng(3);
    Coeff6 prev = p.value;
    double max_rate = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const Coeff6 v = perturb_step(p, rng);
        ASSERT_LE(v.cwiseAbs().maxCoeff(), 0.05);
        max_rate = std::max(max_rate, (v - prev).cwiseAbs().maxCoeff());
        prev = v;
    }
    EXPECT_LE(max_rate, 0.01);
    EXPECT_GT(max_rate, 0.009);
}

TEST(Perturbation, BoundsFromTrim) {
    Coeff6 c;
    c << 0.5, 0.0, -0.3, 0.001, 0.0, -2.0;
    const auto p = perturbation_bounds_from_trim(c);
    EXPECT_DOUBLE_EQ(p.magnitude[0], 0.05);
    EXPECT_DOUBLE_EQ(p.magnitude[1], 0.01);
    EXPECT_DOUBLE_EQ(p.magnitude[5], 0.2);
    EXPECT_DOUBLE_EQ(p.rate[5], 0.2 / 25.0);
}

TEST(SensorNoise, ZeroSpecIsIdentity) {
    Measurement m;
    m.rates = Vec3(0.1, 0.2, 0.3);
    m.airspeed = 21.0;
    m.euler = Vec3(0.1, -0.1, 2.0);
    m.position = Vec3(1, 2, 3);
    m.accel = Vec3(0, 0, -9.8);
    m.course = 1.0;
    Rng rng(1);
    const Measurement n = apply_sensor_noise(m, SensorNoiseSpec::none(), rng);
    EXPECT_EQ(n.rates, m.rates);
    EXPECT_EQ(n.airspeed, m.airspeed);
    EXPECT_EQ(n.euler, m.euler);
    EXPECT_EQ(n.position, m.position);
    EXPECT_EQ(n.accel, m.accel);
    EXPECT_EQ(n.course, m.course);
}

TEST(SensorNoise, YawStandardDeviation) {
    const SensorNoiseSpec spec;
    EXPECT_EQ(spec.yaw, 0.1);
    EXPECT_EQ(spec.airspeed, 2.0);
    Rng rng(77);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = apply_sensor_noise(Measurement{}, spec, rng).euler.z();
        s += y;
        s2 += y * y;
    }
    const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
    EXPECT_NEAR(sd, 0.1, 0.003);
}

TEST(CommandDelay, PassthroughAndShift) {
    const CommandVector ref(9, 9, 9, 9), a(1, 0, 0, 0), b(2, 0, 0, 0), c(3, 0, 0, 0);
    CommandDelay d0(0);
    EXPECT_EQ(d0.push(a, ref), a);
    EXPECT_EQ(d0.push(b, ref), b);
    CommandDelay d1(1);
    EXPECT_EQ(d1.push(a, ref), ref);
    EXPECT_EQ(d1.push(b, ref), a);
    EXPECT_EQ(d1.push(c, ref), b);
    d1.reset(1);
    EXPECT_EQ(d1.push(c, ref), ref);
    EXPECT_THROW(d1.reset(2), ConfigError);
}

// ---------------------------------------------------------------- reference

TEST(Trim, AllPrimitivesConverge) {
    const AirframeParams ap;
    std::vector<double> kappas{0.0};
    kappas.insert(kappas.end(), kTurnCurvatures.begin(), kTurnCurvatures.end());
    for (double k : kappas)
        for (double g : kFlightPathAngles) {
            const TrimCondition t = solve_trim(ap, k, g);
            EXPECT_LT(t.residual, 1e-6) << k << " " << g;
            EXPECT_GT(t.command[kThrottle], 0.0);
            EXPECT_LT(t.command.head<3>().cwiseAbs().maxCoeff(), 0.4);
            // Independent residual: rigid-body accelerations at the trim state.
            const auto d = state_derivative(ap, t.state_at(Vec3::Zero(), 0.0), Vec3::Zero(), Coeff6::Zero());
            EXPECT_LT(d.velocity.norm() + d.rates.norm(), 1e-6);
            // Course coincides with heading and the flight-path angle is gamma.
            const auto pa = path_angles(t.state_at(Vec3::Zero(), 0.7).inertial_velocity());
            EXPECT_NEAR(wrap_angle(pa.chi - 0.7), 0.0, 1e-8);
            EXPECT_NEAR(pa.gamma, g, 1e-8);
        }
}

TEST(Trim, StraightAndLevel) {
    const TrimCondition t = solve_trim(AirframeParams{}, 0.0, 0.0);
    EXPECT_LT(t.rates.norm(), 1e-12);
    EXPECT_NEAR(t.phi, 0.0, 1e-4);
    EXPECT_LT(t.residual, 1e-6);
}

TEST(Trim, CoordinatedTurnBank) {
    for (double k : kTurnCurvatures) {
        const TrimCondition t = solve_trim(AirframeParams{}, k, 0.0);
        const double expect = std::atan(21.0 * 21.0 * k / kG);
        EXPECT_NEAR(t.phi * 180 / kPi, expect * 180 / kPi, 2.0) << k;
    }
    EXPECT_NEAR(std::atan(21.0 * 21.0 * 0.02 / kG) * 180 / kPi, 41.96, 0.01);
}

TEST(Trim, ClimbPitchesUp) {
    const TrimCondition t = solve_trim(AirframeParams{}, 0.0, 0.21);
    EXPECT_GT(t.theta, 0.0);
    EXPECT_LT(t.residual, 1e-6);
}

TEST(Trim, InvalidInputs) {
    EXPECT_THROW(solve_trim(AirframeParams{}, std::nan(""), 0.0), ConfigError);
    EXPECT_THROW(solve_trim(AirframeParams{}, 0.0, 2.0), ConfigError);
    EXPECT_THROW(solve_trim(AirframeParams{}, 1.0, 0.0), ConfigError);
}

TEST(Trim, SelfConsistencyOverFiveSeconds) {
    const AirframeParams ap;
    const TrimTable table(ap, 21.0);
    std::vector<double> kappas{0.0};
    kappas.insert(kappas.end(), kTurnCurvatures.begin(), kTurnCurvatures.end());
    for (double k : kappas)
        for (double g : kFlightPathAngles) {
            const TrimCondition& t = table.at(k, g);
            const Pose start{Vec3(0, 0, -100), 0.4};
            const PathSegment seg = build_segment(t, 5.0, start, 0.04);
            AircraftState s = t.state_at(start.position, start.heading);
            double worst = 0.0;
            for (int i = 1; i <= 125; ++i) {
                s.delta = actuator_step(ap, s.delta, t.command, {}, 0.04);
                s = rk4_step(ap, s, Vec3::Zero(), Coeff6::Zero(), 0.04);
                const Vec3 ref = i < 125 ? seg.points[static_cast<std::size_t>(i)].position : seg.end.position;
                worst = std::max(worst, (s.position - ref).norm());
            }
            EXPECT_LT(worst, 0.5) << k << " " << g;
        }
}

TEST(Segment, StraightLineEndpoint) {
    const TrimCondition t = solve_trim(AirframeParams{}, 0.0, 0.0);
    const PathSegment s = build_segment(t, 10.0, Pose{}, 0.04);
    EXPECT_LT((s.end.position - Vec3(210, 0, 0)).norm(), 1e-9);
    EXPECT_EQ(s.points.size(), 250u);
    for (const auto& p : s.points) EXPECT_EQ(p.command, t.command);
}

TEST(Segment, TurnGeometry) {
    const TrimCondition t = solve_trim(AirframeParams{}, 0.02, 0.0);
    EXPECT_NEAR(t.turn_rate, 0.42, 1e-12);
    const PathSegment s = build_segment(t, 10.0, Pose{}, 0.04);
    const Vec3 center(0.0, 50.0, 0.0);  // right turn from heading north
    for (const auto& p : s.points) EXPECT_NEAR((p.position - center).norm(), 50.0, 1e-9);
    EXPECT_NEAR(wrap_angle(s.end.heading - 4.2), 0.0, 1e-12);
}

TEST(Segment, ClimbAltitudeGain) {
    const TrimCondition t = solve_trim(AirframeParams{}, 0.0, 0.11);
    const PathSegment s = build_segment(t, 10.0, Pose{}, 0.04);
    EXPECT_NEAR(s.end.position.z(), -21.0 * std::sin(0.11) * 10.0, 1e-9);
    EXPECT_NEAR(s.end.position.z(), -23.05, 0.01);
}

TEST(Concatenate, ContinuityAndLength) {
    const AirframeParams ap;
    const TrimTable table(ap, 21.0);
    Pose p;
    std::vector<PathSegment> segs;
    for (auto [k, g, d] : {std::tuple{0.0, 0.0, 5.0}, {0.02, 0.11, 7.0}, {0.0, -0.21, 4.0}}) {
        segs.push_back(build_segment(table.at(k, g), d, p, 0.04));
        p = segs.back().end;
    }
    const ReferencePath path = concatenate_segments(segs, 0.04);
    EXPECT_NEAR(path.length(), 21.0 * 16.0, 1e-9);
    EXPECT_EQ(path.size(), 400u);
    for (std::size_t i = 1; i < path.size(); ++i) {
        EXPECT_LE((path[i].position - path[i - 1].position).norm(), 21.0 * 0.04 + 1e-9);
        EXPECT_LT(std::abs(wrap_angle(path[i].course - path[i - 1].course)), 0.42 * 0.04 + 1e-9);
    }
    segs[1].start.position.x() += 1.0;
    EXPECT_THROW(concatenate_segments(segs, 0.04), ProtocolError);
    EXPECT_THROW(concatenate_segments({}, 0.04), ProtocolError);
}

TEST(SamplePath, PrimitivesDeterminismContinuity) {
    const TrimTable table(AirframeParams{}, 21.0);
    const std::set<double> kset{0.0, -0.02, -0.012, 0.012, 0.02};
    const std::set<double> gset(kFlightPathAngles.begin(), kFlightPathAngles.end());
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        const ReferencePath path = sample_path(rng, table, PathConfig{}, 801, 0.04);
        ASSERT_GE(path.size(), 801u);
        for (std::size_t i = 0; i < path.size(); ++i) {
            ASSERT_TRUE(kset.count(path[i].kappa));
            ASSERT_TRUE(gset.count(path[i].gamma));
            if (i > 0) {
                ASSERT_LE((path[i].position - path[i - 1].position).norm(), 21.0 * 0.04 + 1e-9);
            }
        }
    }
    Rng a(3), b(3);
    const auto pa = sample_path(a, table, PathConfig{}, 801, 0.04);
    const auto pb = sample_path(b, table, PathConfig{}, 801, 0.04);
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) ASSERT_EQ(pa[i].position, pb[i].position);
}

TEST(AdvanceReference, ProjectionMonotoneCapped) {
    const TrimTable table(AirframeParams{}, 21.0);
    PathConfig cfg;
    cfg.mode = PathMode::StraightLevel;
    cfg.random_heading = false;
    Rng rng(0);
    const ReferencePath path = sample_path(rng, table, cfg, 200, 0.04);
    // On the path one sample ahead: tracks it exactly.
    EXPECT_EQ(advance_reference(path, path[11].position, 10).index, 11u);
    // Stalled progress never retreats.
    EXPECT_EQ(advance_reference(path, path[0].position, 10).index, 10u);
    // 10 m ahead: projection is ~12 samples, capped at max_advance.
    const Vec3 ahead = path[10].position + Vec3(10.0, 0.0, 0.0);
    EXPECT_EQ(advance_reference(path, ahead, 10).index, 13u);
    AdvanceConfig wide;
    wide.max_advance = 100;
    EXPECT_EQ(advance_reference(path, ahead, 10, wide).index, 10u + 12u);
    // End of path.
    const auto end = advance_reference(path, path[path.size() - 1].position, path.size() - 2);
    EXPECT_TRUE(end.complete);
    EXPECT_THROW(advance_reference(path, Vec3::Zero(), path.size()), ProtocolError);
}
