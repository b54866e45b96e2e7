#include "debatelab/persona.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "debatelab/errors.hpp"
#include "debatelab/parallel.hpp"

namespace debatelab {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr std::array<std::string_view, 100> kNamePool{
    "Andrew",   "Amelia",   "James",    "Olivia",    "Robert",   "Emma",      "Michael",
    "Sophia",   "William",  "Isabella", "David",     "Charlotte", "Richard", "Mia",
    "Joseph",   "Harper",   "Thomas",   "Evelyn",    "Charles",  "Abigail",   "Christopher",
    "Emily",    "Daniel",   "Elizabeth", "Matthew",  "Sofia",    "Anthony",   "Avery",
    "Mark",     "Ella",     "Donald",   "Scarlett",  "Steven",   "Grace",     "Paul",
    "Chloe",    "Joshua",   "Victoria", "Kenneth",   "Riley",    "Kevin",     "Aria",
    "Brian",    "Lily",     "George",   "Aubrey",    "Timothy",  "Zoey",      "Ronald",
    "Penelope", "Edward",   "Lillian",  "Jason",     "Addison",  "Jeffrey",   "Layla",
    "Ryan",     "Natalie",  "Jacob",    "Camila",    "Gary",     "Hannah",    "Nicholas",
    "Brooklyn", "Eric",     "Zoe",      "Jonathan",  "Nora",     "Stephen",   "Leah",
    "Larry",    "Savannah", "Justin",   "Audrey",    "Scott",    "Claire",    "Brandon",
    "Eleanor",  "Benjamin", "Skylar",   "Samuel",    "Ellie",    "Gregory",   "Samantha",
    "Alexander", "Stella",  "Frank",    "Paisley",   "Patrick",  "Violet",    "Raymond",
    "Mila",     "Jack",     "Allison",  "Dennis",    "Alexa",    "Jerry",     "Anna",
    "Tyler",    "Hazel",
};

std::string_view severity_phrase(Severity s) {
  return s == Severity::MajorProblem ? "a major problem" : "a minor problem or not a problem at all";
}

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

std::string_view to_string(Party party) {
  switch (party) {
    case Party::Republican: return "Republican";
    case Party::Democrat: return "Democrat";
    case Party::Default: return "Default";
  }
  return "Default";
}

std::optional<Party> party_from_string(std::string_view name) {
  const auto l = lower(name);
  if (l == "republican") return Party::Republican;
  if (l == "democrat") return Party::Democrat;
  if (l == "default") return Party::Default;
  return std::nullopt;
}

Party opposing(Party party) {
  if (party == Party::Republican) return Party::Democrat;
  if (party == Party::Democrat) return Party::Republican;
  throw ConfigError("the Default party has no opposite");
}

std::vector<TopicStance> partisan_stances(Party party) {
  if (party == Party::Default) throw ConfigError("the Default persona carries no topic stances");
  const bool dem = party == Party::Democrat;
  const auto major_if = [](bool b) { return b ? Severity::MajorProblem : Severity::MinorOrNoProblem; };
  return {
      {TopicKey::GunViolence, major_if(dem)},
      {TopicKey::Racism, major_if(dem)},
      {TopicKey::ClimateChange, major_if(dem)},
      {TopicKey::IllegalImmigration, major_if(!dem)},
  };
}

std::string build_meta_prompt(Party party, std::span<const TopicStance> stances,
                              std::string_view name, const PromptTemplates& templates) {
  if (party == Party::Default) throw ConfigError("meta-prompts are only built for partisan parties");
  std::string lines;
  for (const auto& t : topic_registry()) {
    const auto it = std::find_if(stances.begin(), stances.end(),
                                 [&](const TopicStance& s) { return s.topic == t.key; });
    if (it == stances.end()) throw MissingStance("no stance given for topic " + t.slug);
    if (!lines.empty()) lines += '\n';
    lines += "- " + capitalize(t.display_name) + ": " + std::string(severity_phrase(it->severity));
  }
  return substitute(templates.meta_prompt,
                    {{"name", name}, {"party", to_string(party)}, {"stances", lines}});
}

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

std::string validate_story(std::string_view story, Party party) {
  if (word_count(story) == 0) return "story is empty";
  if (lower(story).find(lower(to_string(party))) == std::string::npos)
    return "story does not mention " + std::string(to_string(party));
  if (word_count(story) > static_cast<std::size_t>(kMaxStoryWords))
    return "story exceeds " + std::to_string(kMaxStoryWords) + " words";
  return {};
}

std::span<const std::string_view> bundled_name_pool() { return kNamePool; }

std::size_t default_name_offset(Party party, std::size_t pool_size) {
  return party == Party::Democrat ? pool_size / 2 : 0;
}

std::vector<Persona> generate_roster(Party party, int count, Gateway& gateway,
                                     std::span<const std::string> name_pool,
                                     const RosterOptions& options) {
  if (party == Party::Default) throw ConfigError("rosters are generated for partisan parties only");
  if (count <= 0) throw ConfigError("roster count must be positive");
  if (static_cast<std::size_t>(count) > name_pool.size())
    throw ConfigError("roster count " + std::to_string(count) + " exceeds name pool of " +
                      std::to_string(name_pool.size()));
  {
    std::set<std::string> distinct(name_pool.begin(), name_pool.end());
    if (distinct.size() != name_pool.size()) throw ConfigError("name pool contains duplicates");
  }

  const PromptTemplates& templates = options.templates ? *options.templates : PromptTemplates::defaults();
  const auto stances = partisan_stances(party);
  const std::string party_slug = lower(to_string(party));

  std::vector<Persona> roster(static_cast<std::size_t>(count));
  std::vector<RequestLog> logs(roster.size());

  GenerationParams params = GenerationParams::sampling(options.max_tokens);
  params.seed = options.seed;

  parallel_for(roster.size(), options.parallelism, [&](std::size_t slot) {
    const std::string& name = name_pool[(options.name_offset + slot) % name_pool.size()];
    char id[64];
    std::snprintf(id, sizeof id, "%s-%03zu", party_slug.c_str(), slot);

    RequestContext ctx;
    ctx.kind = RequestKind::Persona;
    ctx.stream = id;
    ctx.persona_id = id;
    ctx.role = std::string(to_string(party));
    ctx.log = &logs[slot];

    const std::string prompt = build_meta_prompt(party, stances, name, templates);
    std::string reason;
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::string story;
      try {
        story = gateway.complete(prompt, params, ctx);
      } catch (const EmptyCompletion&) {
        story.clear();
      }
      reason = validate_story(story, party);
      if (reason.empty()) {
        roster[slot] = Persona{id, name, party, std::move(story)};
        return;
      }
    }
    throw GenerationFailed("persona slot " + std::string(id) + " failed validation twice: " + reason);
  });

  if (options.log != nullptr)
    for (const auto& l : logs) options.log->append_all(l);
  return roster;
}

Persona default_persona() {
  static std::atomic<unsigned long long> counter{0};
  return default_persona("default-" + std::to_string(++counter));
}

Persona default_persona(std::string id, std::string name) {
  return Persona{std::move(id), std::move(name), Party::Default, std::string(kDefaultDirective)};
}

void write_roster(const std::filesystem::path& path, std::span<const Persona> roster) {
  std::string text;
  for (const auto& p : roster) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["name"] = p.name;
    j["party"] = to_string(p.party);
    j["background_story"] = p.background_story;
    text += j.dump();
    text += '\n';
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write roster " + path.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

std::vector<Persona> read_roster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read roster " + path.string());
  std::vector<Persona> roster;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Persona p;
      p.id = j.at("id").get<std::string>();
      p.name = j.at("name").get<std::string>();
      const auto party = party_from_string(j.at("party").get<std::string>());
      if (!party) throw ConfigError("unknown party");
      p.party = *party;
      p.background_story = j.at("background_story").get<std::string>();
      if (p.name.empty()) throw ConfigError("empty name");
      if (!ids.insert(p.id).second) throw ConfigError("duplicate id " + p.id);
      roster.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return roster;
}

}  // namespace debatelab
