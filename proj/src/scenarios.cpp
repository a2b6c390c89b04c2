#include "aoi/scenarios.hpp"

#include <stdexcept>

namespace aoi {

namespace {

SourceSpec stateless_source(int num_sensors) {
    SourceSpec s;
    s.num_states = 1;
    s.transition = Eigen::MatrixXd::Ones(1, 1);
    s.obs_prob = Eigen::MatrixXd::Zero(num_sensors, 1);
    return s;
}

// Two-state "busy/idle" chain. State 1 is the unobservable mode held a
// fraction `hold` of the time; state 2 is the observable mode.
SourceSpec two_state_source(int num_sensors, double hold) {
    SourceSpec s;
    s.num_states = 2;
    s.transition.resize(2, 2);
    s.transition << hold, 1.0 - hold, hold, 1.0 - hold;
    s.obs_prob = Eigen::MatrixXd::Zero(num_sensors, 2);
    return s;
}

}  // namespace

SystemSpec scenario_toy(char variant, double p, double alpha) {
    SystemSpec spec;
    switch (variant) {
        case 'a': {
            spec.num_sensors = 3;
            spec.channel = Eigen::VectorXd::Ones(3);
            for (int k = 0; k < 2; ++k) spec.sources.push_back(stateless_source(3));
            spec.sources[0].obs_prob(0, 0) = p;
            spec.sources[1].obs_prob(1, 0) = p;
            spec.sources[0].obs_prob(2, 0) = 1.0 - p;
            spec.sources[1].obs_prob(2, 0) = 1.0 - p;
            break;
        }
        case 'b':
        case 'c': {
            const int n = variant == 'b' ? 2 : 3;
            spec.num_sensors = n;
            spec.channel = Eigen::VectorXd::Ones(n);
            // Source 1 is observable a fraction 1-alpha of the time, source 2
            // a fraction alpha.
            spec.sources.push_back(two_state_source(n, alpha));
            spec.sources.push_back(two_state_source(n, 1.0 - alpha));
            spec.sources[0].obs_prob(0, 1) = p;
            spec.sources[1].obs_prob(1, 1) = p;
            if (variant == 'c') {
                spec.sources[0].obs_prob(2, 1) = 1.0 - p;
                spec.sources[1].obs_prob(2, 1) = 1.0 - p;
            }
            break;
        }
        default:
            throw std::invalid_argument("unknown toy variant");
    }
    return spec;
}

SystemSpec scenario_small_factory(double alpha, double p) {
    const int zones = 4;
    SourceSpec src;
    src.num_states = zones;
    src.transition = Eigen::MatrixXd::Zero(zones, zones);
    for (int z = 0; z < zones; ++z) {
        src.transition(z, z) = 1.0 - 2.0 * alpha;
        src.transition(z, (z + 1) % zones) = alpha;
        src.transition(z, (z + zones - 1) % zones) = alpha;
    }
    const int covered[] = {1, 2, 4};  // camera n watches zone covered[n-1]
    src.obs_prob = Eigen::MatrixXd::Zero(3, zones);
    for (int n = 0; n < 3; ++n) src.obs_prob(n, covered[n] - 1) = p;

    SystemSpec spec;
    spec.num_sensors = 3;
    spec.channel = Eigen::VectorXd::Ones(3);
    spec.sources.assign(3, src);
    return spec;
}

SystemSpec scenario_large_factory(double gamma, double alpha) {
    const int side = 8;
    const int cells = side * side;
    SourceSpec src;
    src.num_states = cells;
    src.transition = Eigen::MatrixXd::Zero(cells, cells);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const int s = r * side + c;
            int neighbors = 0;
            auto go = [&](int rr, int cc) {
                if (rr < 0 || rr >= side || cc < 0 || cc >= side) return;
                src.transition(s, rr * side + cc) = alpha;
                ++neighbors;
            };
            go(r - 1, c);
            go(r + 1, c);
            go(r, c - 1);
            go(r, c + 1);
            src.transition(s, s) = 1.0 - neighbors * alpha;
        }
    }
    // Hierarchical coverage: level l has (8 / 2^(l-1))^2 sensors over
    // 2^(l-1) x 2^(l-1) zones, hit probability gamma^(l-1).
    int num_sensors = 0;
    for (int l = 1; l <= 4; ++l) num_sensors += (cells >> (2 * (l - 1)));
    src.obs_prob = Eigen::MatrixXd::Zero(num_sensors, cells);
    int sensor = 0;
    double hit = 1.0;
    for (int l = 1; l <= 4; ++l) {
        const int block = 1 << (l - 1);
        for (int br = 0; br < side; br += block) {
            for (int bc = 0; bc < side; bc += block) {
                for (int r = br; r < br + block; ++r)
                    for (int c = bc; c < bc + block; ++c)
                        src.obs_prob(sensor, r * side + c) = hit;
                ++sensor;
            }
        }
        hit *= gamma;
    }

    SystemSpec spec;
    spec.num_sensors = num_sensors;
    spec.channel = Eigen::VectorXd::Ones(num_sensors);
    spec.sources.assign(10, src);
    return spec;
}

std::pair<SystemSpec, SystemState> scenario_motivating() {
    // States: 1 = Z1a, 2 = Z1b, 3 = Z2, 4 = Z3, 5 = Z4 (zone 1 takes two
    // slots, the rest one).
    SourceSpec src;
    src.num_states = 5;
    src.transition = Eigen::MatrixXd::Zero(5, 5);
    src.transition(0, 1) = 1.0;
    src.transition(1, 2) = 1.0;
    src.transition(2, 3) = 1.0;
    src.transition(3, 4) = 1.0;
    src.transition(4, 0) = 1.0;
    // Sensors in the order C4, C1, C2.
    src.obs_prob = Eigen::MatrixXd::Zero(3, 5);
    src.obs_prob(0, 4) = 1.0;  // C4 watches Z4
    src.obs_prob(1, 0) = 1.0;  // C1 watches Z1a and Z1b
    src.obs_prob(1, 1) = 1.0;
    src.obs_prob(2, 2) = 1.0;  // C2 watches Z2

    SystemSpec spec;
    spec.num_sensors = 3;
    spec.channel = Eigen::VectorXd::Ones(3);
    spec.sources.assign(3, src);

    SystemState init;
    init.source_states = {2, 3, 4};  // AGVs in Z1b, Z2, Z3
    init.aoi = {1, 1, 4};
    return {spec, init};
}

}  // namespace aoi
