#include "ots/netmodel.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <queue>

#include <nlohmann/json.hpp>

namespace ots {

using nlohmann::json;

Network::Network(std::string name, std::vector<Bus> buses,
                 std::vector<Line> lines)
    : name_(std::move(name)), buses_(std::move(buses)), lines_(std::move(lines)) {
  if (buses_.empty()) throw ValidationError("network has no buses");
  for (size_t i = 0; i < buses_.size(); ++i) {
    const Bus& b = buses_[i];
    const std::string who = "bus " + std::to_string(b.id);
    if (!bus_pos_.emplace(b.id, static_cast<int>(i)).second)
      throw ValidationError("duplicate " + who);
    if (b.id < 1) throw ValidationError(who + ": ids are 1-based");
    if (b.p_min < 0) throw ValidationError(who + ": p_min < 0");
    if (b.p_min > b.p_max) throw ValidationError(who + ": p_min > p_max");
    if (b.d_base < 0) throw ValidationError(who + ": d_base < 0");
    if (b.cost < 0) throw ValidationError(who + ": cost < 0");
  }
  if (!bus_pos_.contains(1))
    throw ValidationError("bus 1 (angle reference) is missing");
  for (size_t i = 0; i < lines_.size(); ++i) {
    const Line& l = lines_[i];
    const std::string who = "line " + std::to_string(l.id);
    if (!line_pos_.emplace(l.id, static_cast<int>(i)).second)
      throw ValidationError("duplicate " + who);
    if (l.from_bus == l.to_bus) throw ValidationError(who + ": self-loop");
    if (!bus_pos_.contains(l.from_bus) || !bus_pos_.contains(l.to_bus))
      throw ValidationError(who + ": endpoint references unknown bus");
    if (!(l.susceptance > 0)) throw ValidationError(who + ": susceptance <= 0");
    if (!(l.f_min < 0) || !(l.f_max > 0))
      throw ValidationError(who + ": thermal limits must satisfy f_min < 0 < f_max");
  }

  // Connectivity over buses through lines.
  std::vector<std::vector<int>> adj(buses_.size());
  for (const Line& l : lines_) {
    adj[bus_pos_.at(l.from_bus)].push_back(bus_pos_.at(l.to_bus));
    adj[bus_pos_.at(l.to_bus)].push_back(bus_pos_.at(l.from_bus));
  }
  std::vector<char> seen(buses_.size(), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  size_t reached = 1;
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  if (reached != buses_.size())
    throw DisconnectedError("network " + name_ + " is not connected (" +
                            std::to_string(reached) + " of " +
                            std::to_string(buses_.size()) + " buses reachable)");
}

int Network::bus_pos(int bus_id) const {
  auto it = bus_pos_.find(bus_id);
  if (it == bus_pos_.end())
    throw ValidationError("unknown bus id " + std::to_string(bus_id));
  return it->second;
}

int Network::line_pos(int line_id) const {
  auto it = line_pos_.find(line_id);
  if (it == line_pos_.end())
    throw UnknownLineError("unknown line id " + std::to_string(line_id));
  return it->second;
}

namespace {

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) throw ParseError(ctx + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(ctx + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Network load_network(const std::filesystem::path& path) {
  const json j = parse_file(path);
  if (!j.is_object()) throw ParseError(path.string() + ": not a JSON object");
  const std::string name = field<std::string>(j, "name", path.string());
  if (!j.contains("buses") || !j.at("buses").is_array())
    throw ParseError(path.string() + ": missing 'buses' array");
  if (!j.contains("lines") || !j.at("lines").is_array())
    throw ParseError(path.string() + ": missing 'lines' array");
  std::vector<Bus> buses;
  for (const json& jb : j.at("buses")) {
    const std::string ctx = path.string() + " bus entry";
    buses.push_back({field<int>(jb, "id", ctx), field<double>(jb, "cost", ctx),
                     field<double>(jb, "p_min", ctx),
                     field<double>(jb, "p_max", ctx),
                     field<double>(jb, "d_base", ctx)});
  }
  std::vector<Line> lines;
  for (const json& jl : j.at("lines")) {
    const std::string ctx = path.string() + " line entry";
    lines.push_back({field<int>(jl, "id", ctx), field<int>(jl, "from", ctx),
                     field<int>(jl, "to", ctx), field<double>(jl, "b", ctx),
                     field<double>(jl, "f_min", ctx),
                     field<double>(jl, "f_max", ctx)});
  }
  return Network(name, std::move(buses), std::move(lines));
}

void save_network(const Network& net, const std::filesystem::path& path) {
  json j;
  j["name"] = net.name();
  j["buses"] = json::array();
  for (const Bus& b : net.buses())
    j["buses"].push_back({{"id", b.id},
                          {"cost", b.cost},
                          {"p_min", b.p_min},
                          {"p_max", b.p_max},
                          {"d_base", b.d_base}});
  j["lines"] = json::array();
  for (const Line& l : net.lines())
    j["lines"].push_back({{"id", l.id},
                          {"from", l.from_bus},
                          {"to", l.to_bus},
                          {"b", l.susceptance},
                          {"f_min", l.f_min},
                          {"f_max", l.f_max}});
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

double unit_draw(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t z = splitmix64(seed + counter * 0x9e3779b97f4a7c15ULL);
  return static_cast<double>(z >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace

std::vector<Instance> generate_instances(const Network& net, int count,
                                         std::uint64_t seed, double spread) {
  if (count < 1) throw ValidationError("instance count must be >= 1");
  if (spread < 0.0 || spread > 1.0)
    throw ValidationError("spread must lie in [0, 1]");

  // Draw order follows ascending bus id, not file order.
  std::vector<int> order(net.buses().size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return net.buses()[a].id < net.buses()[b].id;
  });

  const std::uint64_t n_buses = net.buses().size();
  std::vector<Instance> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Instance inst;
    inst.network_name = net.name();
    inst.seed_info = {seed, i};
    inst.demand.resize(n_buses);
    for (std::uint64_t rank = 0; rank < n_buses; ++rank) {
      const Bus& b = net.buses()[order[rank]];
      const double u =
          unit_draw(seed, static_cast<std::uint64_t>(i) * n_buses + rank + 1);
      inst.demand[order[rank]] = b.d_base * (1.0 - spread + 2.0 * spread * u);
    }
    validate_instance(net, inst);
    out.push_back(std::move(inst));
  }
  return out;
}

void validate_instance(const Network& net, const Instance& inst) {
  if (inst.demand.size() != net.buses().size())
    throw ValidationError("instance for " + inst.network_name + " has " +
                          std::to_string(inst.demand.size()) +
                          " demands for " + std::to_string(net.buses().size()) +
                          " buses");
  double total_demand = 0, total_capacity = 0;
  for (size_t i = 0; i < inst.demand.size(); ++i) {
    if (inst.demand[i] < 0)
      throw ValidationError("negative demand at bus " +
                            std::to_string(net.buses()[i].id));
    total_demand += inst.demand[i];
    total_capacity += net.buses()[i].p_max;
  }
  if (total_demand > total_capacity)
    throw ValidationError("instance demand " + std::to_string(total_demand) +
                          " MW exceeds total capacity " +
                          std::to_string(total_capacity) + " MW");
}

void save_instances(const std::vector<Instance>& instances,
                    const std::filesystem::path& path) {
  json j = json::array();
  for (const Instance& inst : instances)
    j.push_back({{"network", inst.network_name},
                 {"seed", inst.seed_info.seed},
                 {"index", inst.seed_info.index},
                 {"demand", inst.demand}});
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<Instance> load_instances(const std::filesystem::path& path,
                                     const Network& net) {
  const json j = parse_file(path);
  if (!j.is_array()) throw ParseError(path.string() + ": not a JSON array");
  std::vector<Instance> out;
  for (const json& ji : j) {
    const std::string ctx = path.string() + " instance entry";
    Instance inst;
    inst.network_name = field<std::string>(ji, "network", ctx);
    inst.seed_info.seed = field<std::uint64_t>(ji, "seed", ctx);
    inst.seed_info.index = field<int>(ji, "index", ctx);
    inst.demand = field<std::vector<double>>(ji, "demand", ctx);
    if (inst.network_name != net.name())
      throw ValidationError(ctx + ": instance for network '" +
                            inst.network_name + "', expected '" + net.name() +
                            "'");
    validate_instance(net, inst);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace ots
