#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcdarp/errors.hpp"

namespace tcdarp {

// All times are integer minutes from midnight, all money integer cents,
// all distances integer meters. Exact arithmetic end to end.
using Minutes = int;
using Cents = std::int64_t;
using Meters = std::int64_t;

enum class PassengerType : std::uint8_t { Seated = 0, Wheelchair = 1, ElectricWheelchair = 2 };
inline constexpr int kPassengerTypeCount = 3;

const char* to_string(PassengerType t);
std::optional<PassengerType> passenger_type_from_string(std::string_view s);

// One of the 10 weekly planning units, Mon-AM = 0 .. Fri-PM = 9.
struct PeriodId {
    int index = 0;

    int day() const { return index / 2; }
    bool is_am() const { return index % 2 == 0; }
    std::string name() const;
    static std::optional<PeriodId> parse(std::string_view s);

    auto operator<=>(const PeriodId&) const = default;
};
inline constexpr int kPeriodCount = 10;

struct TimeWindow {
    Minutes earliest = 0;
    Minutes latest = 0;
    bool operator==(const TimeWindow&) const = default;
};

struct Location {
    std::string id;
    Meters x_m = 0; // planar coordinates, stored in meters (file unit: km)
    Meters y_m = 0;
    Minutes service = 0;
    bool operator==(const Location&) const = default;
};

// Square travel matrix over all instance locations. Asymmetry permitted,
// triangle inequality not assumed.
class TravelMatrix {
public:
    TravelMatrix() = default;
    TravelMatrix(int n, std::vector<Minutes> time, std::vector<Meters> dist)
        : n_(n), time_(std::move(time)), dist_(std::move(dist)) {}

    int size() const { return n_; }
    Minutes time(int from, int to) const { return time_[from * n_ + to]; }
    Meters distance(int from, int to) const { return dist_[from * n_ + to]; }

    bool operator==(const TravelMatrix&) const = default;

private:
    int n_ = 0;
    std::vector<Minutes> time_;
    std::vector<Meters> dist_;
};

struct User {
    std::string id;
    PassengerType type = PassengerType::Seated;
    int home = -1;          // location index
    int establishment = -1; // location index
    Minutes max_ride = 0;
    std::array<bool, kPeriodCount> attendance{};
    TimeWindow pickup_am, delivery_am;
    TimeWindow pickup_pm, delivery_pm;

    bool attends(PeriodId p) const { return attendance[p.index]; }
    bool operator==(const User&) const = default;
};

// Capacity vector of one vehicle configuration, indexed by PassengerType.
struct Configuration {
    std::array<int, kPassengerTypeCount> capacity{};

    int cap(PassengerType t) const { return capacity[static_cast<int>(t)]; }
    bool covers(const std::array<int, kPassengerTypeCount>& load) const {
        for (int i = 0; i < kPassengerTypeCount; ++i)
            if (load[i] > capacity[i]) return false;
        return true;
    }
    bool operator==(const Configuration&) const = default;
};

inline constexpr int kUnlimited = -1;

struct VehicleType {
    std::string id;
    int depot = -1; // location index
    std::vector<Configuration> configurations;
    Cents fixed_cost = 0;
    Cents cost_per_km = 0;
    Cents cost_per_hour = 0;
    Minutes reconfig_duration = 0;
    int available = kUnlimited; // kUnlimited or a positive count

    bool unlimited() const { return available == kUnlimited; }
    bool operator==(const VehicleType&) const = default;
};

// One transport demand of one user in one period. AM runs home -> establishment,
// PM runs establishment -> home.
struct Request {
    int user = -1; // index into Instance::users
    PeriodId period;
    int pickup_loc = -1;
    int delivery_loc = -1;
    TimeWindow pickup_window;
    TimeWindow delivery_window;
    PassengerType type = PassengerType::Seated;
    Minutes max_ride = 0;
};

struct Instance {
    std::vector<User> users;               // sorted by id
    std::vector<VehicleType> vehicle_types; // sorted by id
    std::vector<Location> locations;       // sorted by id
    TravelMatrix matrix;
    Minutes consistency_width = 15;

    // id -> index lookups, rebuilt by rebuild_index(). Instances are
    // immutable after construction; safe to share across worker threads.
    std::map<std::string, int> location_index;
    std::map<std::string, int> user_index;
    std::map<std::string, int> vehicle_type_index;

    void rebuild_index();

    bool operator==(const Instance& o) const {
        return users == o.users && vehicle_types == o.vehicle_types &&
               locations == o.locations && matrix == o.matrix &&
               consistency_width == o.consistency_width;
    }
};

// Checks every model invariant; throws ValidationError naming the field.
void validate_instance(const Instance& inst);

// One Request per user attending `period`, ordered by user id.
std::vector<Request> expand_requests(const Instance& inst, PeriodId period);

// Closed-form feasibility of the direct depot->pickup->delivery->depot trip
// (windows + max_ride only; capacity is checked separately).
bool direct_trip_feasible(const Request& r, const Instance& inst);

// ---- file I/O ------------------------------------------------------------

Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

// ---- synthetic generation ------------------------------------------------

struct GeneratorParams {
    std::uint64_t seed = 0;
    int n_establishments = 2;
    int n_users = 10;
    double dispersion_km = 10.0;
    double wheelchair_share = 0.15;
    double electric_share = 0.05;
    double attendance_prob = 0.8;
    Minutes window_width_min = 30;
    std::string vehicle_catalog_preset = "standard"; // basic | standard | mixed
};

Instance generate_instance(const GeneratorParams& params);

// ---- exact decimal helpers ----------------------------------------------

// "12.34" -> 1234; accepts up to `scale_digits` decimals, exact.
Cents parse_scaled_decimal(double value, int scale_digits, const std::string& path);
double scaled_to_double(std::int64_t scaled, int scale_digits);
std::string format_cents(Cents c);

} // namespace tcdarp
