#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "ots/errors.hpp"

namespace ots {

/// A bus carries a (possibly degenerate) generator and a load. Buses
/// without a physical generator use p_min = p_max = 0.
struct Bus {
  int id;         // 1-based; bus 1 is the angle reference
  double cost;    // marginal generation cost, currency/MWh
  double p_min;   // MW
  double p_max;   // MW
  double d_base;  // baseline demand, MW
};

struct Line {
  int id;
  int from_bus;        // flow sign convention: from -> to positive
  int to_bus;
  double susceptance;  // MW per radian of angle difference
  double f_min;        // thermal limit, MW, < 0
  double f_max;        // thermal limit, MW, > 0
};

/// Immutable, validated grid description. Parallel lines (same endpoint
/// pair) are permitted and stay distinct by line id.
class Network {
 public:
  Network(std::string name, std::vector<Bus> buses, std::vector<Line> lines);

  const std::string& name() const { return name_; }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }

  /// Position of a bus/line in the stored order; throws on unknown ids.
  int bus_pos(int bus_id) const;
  int line_pos(int line_id) const;
  const Bus& bus(int bus_id) const { return buses_[bus_pos(bus_id)]; }
  const Line& line(int line_id) const { return lines_[line_pos(line_id)]; }

 private:
  std::string name_;
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::unordered_map<int, int> bus_pos_;
  std::unordered_map<int, int> line_pos_;
};

struct SeedInfo {
  std::uint64_t seed = 0;
  int index = 0;
};

/// One demand realization over a network's buses (by bus position).
struct Instance {
  std::string network_name;
  std::vector<double> demand;
  SeedInfo seed_info;
};

Network load_network(const std::filesystem::path& path);
void save_network(const Network& net, const std::filesystem::path& path);

/// Draws `count` demand vectors, d_n ~ U[(1-spread) d_base, (1+spread) d_base]
/// per bus. The generator is splitmix64 in counter mode: draw j of instance i
/// hashes seed + (i*|buses| + j + 1) * 0x9e3779b97f4a7c15, with buses ranked
/// in ascending id order, so output is bitwise reproducible everywhere.
std::vector<Instance> generate_instances(const Network& net, int count,
                                         std::uint64_t seed,
                                         double spread = 0.1);

void validate_instance(const Network& net, const Instance& inst);

void save_instances(const std::vector<Instance>& instances,
                    const std::filesystem::path& path);
std::vector<Instance> load_instances(const std::filesystem::path& path,
                                     const Network& net);

}  // namespace ots
