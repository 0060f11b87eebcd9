#include "patchloom/synth/synthetic.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

namespace patchloom::synth {

namespace {

const std::array<const char*, 12> kFieldStems = {"user",  "item",  "order", "buffer",
                                                 "config", "node", "path",  "value",
                                                 "cache", "state", "token", "entry"};
const std::array<const char*, 3> kFieldSuffixes = {"", "Id", "List"};
const std::array<const char*, 8> kClasses = {"User", "Item",  "Order",   "Buffer",
                                             "Node", "Entry", "Session", "Request"};
const std::array<const char*, 4> kVerbs = {"get", "load", "find", "create"};
const std::array<const char*, 4> kNouns = {"Value", "Name", "Items", "State"};
const std::array<std::pair<const char*, const char*>, 7> kCollections = {{{"List", "ArrayList"},
                                                                          {"List", "LinkedList"},
                                                                          {"Set", "HashSet"},
                                                                          {"Set", "TreeSet"},
                                                                          {"Collection", "ArrayList"},
                                                                          {"Queue", "ArrayDeque"},
                                                                          {"Deque", "ArrayDeque"}}};
const std::array<const char*, 8> kRawTypes = {"List",  "Set",      "Collection", "Iterator",
                                              "Class", "Optional", "Future",     "Queue"};
const std::array<const char*, 8> kLoggers = {"log",      "logger",    "LOG",      "LOGGER",
                                             "auditLog", "accessLog", "eventLog", "traceLog"};
const std::array<const char*, 6> kMessages = {"\"start\"", "\"done\"",    "\"retry\"",
                                              "\"skip\"",  "\"timeout\"", "\"closed\""};

}  // namespace

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::this_removal: return "this_removal";
    case Rule::index_increment: return "index_increment";
    case Rule::diamond: return "diamond";
    case Rule::wildcard: return "wildcard";
    case Rule::log_level: return "log_level";
    case Rule::distractor: break;
  }
  return "distractor";
}

std::size_t StatementGenerator::below(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
}

std::string StatementGenerator::field() {
  return std::string(pick(kFieldStems)) + pick(kFieldSuffixes);
}

std::string StatementGenerator::method() {
  return std::string(pick(kVerbs)) + pick(kNouns);
}

std::string StatementGenerator::argument() {
  switch (below(5)) {
    case 0: return field();
    case 1: return pick(kMessages);
    case 2: return std::to_string(below(100));
    case 3: return field() + " , " + field();
    default: return field() + " . " + method() + " ( )";
  }
}

SyntheticPair StatementGenerator::rule_pair(Rule rule) {
  SyntheticPair p;
  p.rule = rule;
  switch (rule) {
    case Rule::this_removal: {
      const auto f = field();
      if (below(2) == 0) {
        p.pre = "return this . " + f + " ;";
        p.post = "return " + f + " ;";
      } else {
        const auto m = method();
        p.pre = "return this . " + f + " . " + m + " ( ) ;";
        p.post = "return " + f + " . " + m + " ( ) ;";
      }
      break;
    }
    case Rule::index_increment: {
      const auto n = below(12);
      const auto lhs = field(), owner = field(), m = method();
      const auto rhs = " ] = this . " + owner + " . " + m + " ( ) ;";
      p.pre = lhs + " [ " + std::to_string(n) + rhs;
      p.post = lhs + " [ " + std::to_string(n + 1) + rhs;
      break;
    }
    case Rule::diamond: {
      const auto& [iface, impl] = pick(kCollections);
      const std::string elem = pick(kClasses);
      const auto head = std::string(iface) + " < " + elem + " > " + field() + " = new " + impl;
      p.pre = head + " < " + elem + " > ( ) ;";
      p.post = head + " < > ( ) ;";
      break;
    }
    case Rule::wildcard: {
      const std::string type = pick(kRawTypes);
      const auto tail = field() + " = " + field() + " . " + method() + " ( " + argument() + " ) ;";
      p.pre = type + " " + tail;
      p.post = type + " < ? > " + tail;
      break;
    }
    case Rule::log_level: {
      std::string logger;
      switch (below(3)) {
        case 0: logger = pick(kLoggers); break;
        case 1: logger = "this . " + field(); break;
        default: logger = field() + " . " + method() + " ( )"; break;
      }
      const auto args = below(2) == 0 ? std::string(pick(kMessages))
                                      : std::string(pick(kMessages)) + " + " + field();
      p.pre = logger + " . trace ( " + args + " ) ;";
      p.post = logger + " . debug ( " + args + " ) ;";
      break;
    }
    case Rule::distractor:
      return distractor();
  }
  return p;
}

SyntheticPair StatementGenerator::distractor() {
  SyntheticPair p;
  p.rule = Rule::distractor;
  switch (below(4)) {
    case 0: {
      const auto f = field(), g = field(), a = argument();
      p.pre = f + " = " + g + " . " + method() + " ( " + a + " ) ;";
      p.post = f + " = " + g + " . " + method() + " ( " + a + " ) ;";
      break;
    }
    case 1: {
      const auto f = field();
      const auto n = std::to_string(1 + below(9));
      p.pre = f + " = " + f + " + " + n + " ;";
      p.post = f + " = " + f + " - " + n + " ;";
      break;
    }
    case 2: {
      const auto f = field();
      p.pre = "if ( " + f + " == null ) return ;";
      p.post = "if ( " + f + " != null ) return ;";
      break;
    }
    default: {
      const auto f = field(), g = field();
      p.pre = std::string(pick(kClasses)) + " " + f + " = " + g + " . " + method() + " ( ) ;";
      p.post = std::string(pick(kClasses)) + " " + f + " = " + g + " . " + method() + " ( ) ;";
      break;
    }
  }
  return p;
}

SyntheticPair StatementGenerator::sample(double distractor_rate) {
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < distractor_rate) {
    return distractor();
  }
  return rule_pair(static_cast<Rule>(below(kRuleCount)));
}

std::string StatementGenerator::neutral_statement() {
  switch (below(3)) {
    case 0: return "int " + field() + " = " + std::to_string(below(50)) + " ;";
    case 1: return field() + " . " + method() + " ( " + argument() + " ) ;";
    default: return "String " + field() + " = " + std::string(pick(kMessages)) + " ;";
  }
}

std::vector<SyntheticPair> generate_pairs(std::size_t count, std::uint64_t seed,
                                          double distractor_rate) {
  StatementGenerator gen(seed);
  std::vector<SyntheticPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gen.sample(distractor_rate));
  return out;
}

namespace {

struct Line {
  std::string text;
  std::string fixed;  // post statement, empty once applied or for neutral lines
};

struct Method {
  std::string name;
  std::vector<Line> lines;
};

struct JavaFile {
  std::string class_name;
  std::vector<Method> methods;

  std::string render() const {
    std::ostringstream out;
    out << "package com.example.synthetic;\n\n";
    out << "public class " << class_name << " {\n";
    out << "  private int counter;\n";
    for (const auto& m : methods) {
      out << "\n  public Object " << m.name << "() {\n";
      for (const auto& l : m.lines) out << "    " << l.text << "\n";
      out << "  }\n";
    }
    out << "}\n";
    return out.str();
  }
};

std::int64_t year_start(int year) {
  using namespace std::chrono;
  return duration_cast<seconds>(sys_days{std::chrono::year{year} / January / 1}.time_since_epoch())
      .count();
}

std::string commit_id(std::uint64_t seed, int index) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  char buf[41];
  std::string id;
  for (int part = 0; part < 3; ++part) {
    h ^= static_cast<std::uint64_t>(index) + 0x9e3779b97f4a7c15ull * (part + 1);
    h *= 1099511628211ull;
    h ^= h >> 29;
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    id += buf;
  }
  return id.substr(0, 40);
}

}  // namespace

repo::MemoryRepository generate_repository(const SyntheticRepoOptions& options) {
  if (options.commits < 2 || options.files < 1 || options.last_year < options.first_year) {
    throw std::invalid_argument("synthetic repository needs >= 2 commits, >= 1 file");
  }
  StatementGenerator gen(options.seed);
  std::mt19937_64 rng(options.seed ^ 0x5bd1e995ull);
  auto uniform = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  std::vector<JavaFile> files;
  int method_counter = 0;
  auto new_method = [&]() {
    Method m;
    m.name = "step" + std::to_string(method_counter++);
    const auto n = 3 + uniform(4);
    for (std::size_t i = 0; i < n; ++i) {
      if (chance(0.7)) {
        auto pair = gen.sample(options.distractor_rate);
        m.lines.push_back({pair.pre, pair.post});
      } else {
        m.lines.push_back({gen.neutral_statement(), ""});
      }
    }
    m.lines.push_back({"return null ;", ""});
    return m;
  };
  for (int f = 0; f < options.files; ++f) {
    JavaFile file;
    file.class_name = std::string(kClasses[static_cast<std::size_t>(f) % kClasses.size()]) +
                      "Service" + (f >= static_cast<int>(kClasses.size()) ? std::to_string(f) : "");
    for (int k = 0; k < 2; ++k) file.methods.push_back(new_method());
    files.push_back(std::move(file));
  }
  auto path_of = [](const JavaFile& f) {
    return "src/main/java/com/example/synthetic/" + f.class_name + ".java";
  };

  repo::MemoryRepository repo;
  const std::int64_t begin = year_start(options.first_year);
  const std::int64_t end = year_start(options.last_year + 1) - 86400;
  const std::int64_t span = (end - begin) / options.commits;
  std::string parent;

  for (int c = 0; c < options.commits; ++c) {
    repo::MemoryRepository::CommitSpec spec;
    spec.id = commit_id(options.seed, c);
    spec.author_time = begin + span * c + static_cast<std::int64_t>(uniform(static_cast<std::size_t>(span / 2 + 1)));
    if (!parent.empty()) spec.parent_ids = {parent};

    if (c == 0) {
      spec.message = "Initial import";
      for (const auto& f : files) spec.writes[path_of(f)] = f.render();
    } else {
      std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> pending;
      for (std::size_t fi = 0; fi < files.size(); ++fi) {
        for (std::size_t mi = 0; mi < files[fi].methods.size(); ++mi) {
          const auto& lines = files[fi].methods[mi].lines;
          for (std::size_t li = 0; li < lines.size(); ++li) {
            if (!lines[li].fixed.empty()) pending.push_back({fi, {mi, li}});
          }
        }
      }
      const auto fi_new = uniform(files.size());
      if (pending.empty() || chance(0.35)) {
        auto m = new_method();
        spec.message = "Add " + m.name + " to " + files[fi_new].class_name;
        files[fi_new].methods.push_back(std::move(m));
        spec.writes[path_of(files[fi_new])] = files[fi_new].render();
      } else {
        const auto& [fi, loc] = pending[uniform(pending.size())];
        auto& line = files[fi].methods[loc.first].lines[loc.second];
        line.text = line.fixed;
        line.fixed.clear();
        spec.message = chance(0.6) ? "Fix handling in " + files[fi].methods[loc.first].name
                                   : "Update " + files[fi].methods[loc.first].name;
        spec.writes[path_of(files[fi])] = files[fi].render();
      }
    }
    parent = spec.id;
    repo.add_commit(std::move(spec));
  }
  return repo;
}

bool parse_synthetic_uri(const std::string& uri, SyntheticRepoOptions& options) {
  const std::string prefix = "synthetic:";
  if (uri.rfind(prefix, 0) != 0) return false;
  std::string rest = uri.substr(prefix.size());
  try {
    const auto colon = rest.find(':');
    std::size_t used = 0;
    const auto seed_text = rest.substr(0, colon);
    options.seed = std::stoull(seed_text, &used);
    if (used != seed_text.size()) return false;
    if (colon != std::string::npos) {
      const auto commits_text = rest.substr(colon + 1);
      options.commits = std::stoi(commits_text, &used);
      if (used != commits_text.size()) return false;
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

}  // namespace patchloom::synth
