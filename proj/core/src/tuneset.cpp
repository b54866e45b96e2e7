#include "debatelab/tuneset.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "debatelab/errors.hpp"
#include "debatelab/parallel.hpp"
#include "debatelab/run_store.hpp"

namespace debatelab {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr std::array<std::string_view, kSeedQuestionCount> kSeedQuestions{
    "Could you discuss your perspective on significant political issues facing America today?",
    "How do you balance Second Amendment rights with the need for gun control measures?",
    "How do you balance the need for national security with the preservation of personal freedoms?",
    "How do you believe the U.S. should handle immigration and border security?",
    "What core political ideals most significantly shape your viewpoint on governance and "
    "policy-making?",
    "What are your views on racial inequality and systemic racism in American society?",
    "What is your stance on the government's role in addressing climate change and environmental "
    "protection?",
    "What role do you think diversity plays in shaping the cultural landscape of America?",
    "What values do you believe are essential to the American identity?",
    "Which political issues do you believe are most urgent for the next president to address?",
};

std::string trim(std::string_view s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return std::string(b, e);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(std::move(line));
  return lines;
}

}  // namespace

std::vector<std::string> QuestionSet::combined() const {
  std::vector<std::string> all = seed;
  all.insert(all.end(), expanded.begin(), expanded.end());
  return all;
}

std::span<const std::string_view> seed_questions() { return kSeedQuestions; }

std::string build_expansion_prompt(std::string_view example_question, const PromptTemplates& templates) {
  return substitute(templates.expansion_prompt, {{"question", example_question}});
}

std::vector<std::string> parse_numbered_list(std::string_view text) {
  std::vector<std::string> items;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == digits || i >= line.size() || (line[i] != '.' && line[i] != ')')) continue;
    std::string item = trim(std::string_view(line).substr(i + 1));
    if (item.size() >= 2 && item.front() == '"' && item.back() == '"') item = trim(item.substr(1, item.size() - 2));
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

std::string question_key(std::string_view question) { return lower(trim(question)); }

bool mentions_party(std::string_view question) {
  const auto l = lower(question);
  return l.find("republican") != std::string::npos || l.find("democrat") != std::string::npos;
}

QuestionSet expand_questions(std::span<const std::string> seeds, Gateway& gateway,
                             const ExpansionOptions& options) {
  if (seeds.size() != static_cast<std::size_t>(kSeedQuestionCount))
    throw ConfigError("question expansion needs exactly " + std::to_string(kSeedQuestionCount) +
                      " seed questions, got " + std::to_string(seeds.size()));
  const PromptTemplates& templates = options.templates ? *options.templates : PromptTemplates::defaults();

  QuestionSet set;
  set.seed.assign(seeds.begin(), seeds.end());
  std::set<std::string> seen;
  for (const auto& s : seeds) seen.insert(question_key(s));

  GenerationParams params = GenerationParams::sampling(options.max_tokens);
  RequestContext ctx;
  ctx.kind = RequestKind::Expansion;
  ctx.stream = "expansion";
  ctx.log = options.log;

  const auto target = static_cast<std::size_t>(options.target);
  for (int attempt = 0; attempt < options.max_attempts && set.expanded.size() < target; ++attempt) {
    const auto prompt = build_expansion_prompt(seeds[static_cast<std::size_t>(attempt) % seeds.size()], templates);
    std::string text;
    try {
      text = gateway.complete(prompt, params, ctx);
    } catch (const EmptyCompletion&) {
      continue;
    }
    for (auto& q : parse_numbered_list(text)) {
      if (set.expanded.size() >= target) break;
      if (mentions_party(q)) continue;
      if (!seen.insert(question_key(q)).second) continue;
      set.expanded.push_back(std::move(q));
    }
  }
  if (set.expanded.size() < target)
    throw ExpansionExhausted("collected " + std::to_string(set.expanded.size()) + " of " +
                             std::to_string(target) + " questions after " +
                             std::to_string(options.max_attempts) + " attempts");
  return set;
}

std::string build_harvest_prompt(const Persona& persona, std::string_view question) {
  std::string prompt = persona.background_story;
  prompt += "\n\nQuestion: ";
  prompt += question;
  prompt += "\nAnswer:";
  return prompt;
}

std::string render_training_text(std::string_view question, std::string_view response) {
  std::string text = "Question: ";
  text += question;
  text += "\nAnswer: ";
  text += response;
  return text;
}

HarvestResult harvest(Party party, const Persona& persona, const QuestionSet& questions, Gateway& gateway,
                      const HarvestOptions& options) {
  if (party == Party::Default) throw ConfigError("harvesting needs a partisan party");
  if (persona.party != party)
    throw ConfigError("persona " + persona.id + " is not a " + std::string(to_string(party)));
  if (options.samples_per_question <= 0) throw ConfigError("samples_per_question must be positive");

  const auto all = questions.combined();
  const auto samples = static_cast<std::size_t>(options.samples_per_question);
  std::vector<std::vector<std::optional<TuneExample>>> slots(all.size());
  std::vector<std::vector<HarvestFailure>> failures(all.size());
  std::vector<RequestLog> logs(all.size());
  const GenerationParams params = GenerationParams::sampling(options.max_tokens);
  std::string party_slug = lower(to_string(party));

  parallel_for(all.size(), options.parallelism, [&](std::size_t q) {
    char stream[64];
    std::snprintf(stream, sizeof stream, "harvest/%s/q%03zu", party_slug.c_str(), q);
    const auto prompt = build_harvest_prompt(persona, all[q]);
    slots[q].resize(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      RequestContext ctx;
      ctx.kind = RequestKind::Harvest;
      ctx.stream = stream;
      ctx.persona_id = persona.id;
      ctx.role = std::string(to_string(party));
      ctx.sample_index = static_cast<int>(s);
      ctx.log = &logs[q];
      std::string response;
      std::string reason = "empty response twice";
      for (int attempt = 0; attempt < 2 && response.empty(); ++attempt) {
        try {
          response = gateway.complete(prompt, params, ctx);
        } catch (const EmptyCompletion&) {
        } catch (const TransportError& e) {
          reason = e.what();
          break;
        }
      }
      if (response.empty()) {
        failures[q].push_back({static_cast<int>(q), static_cast<int>(s), reason});
        continue;
      }
      slots[q][s] = TuneExample{all[q], std::move(response), party, static_cast<int>(q), static_cast<int>(s)};
    }
  });

  HarvestResult result;
  for (std::size_t q = 0; q < all.size(); ++q) {
    for (auto& ex : slots[q])
      if (ex) result.examples.push_back(std::move(*ex));
    result.failures.insert(result.failures.end(), failures[q].begin(), failures[q].end());
    if (options.log != nullptr) options.log->append_all(logs[q]);
  }
  return result;
}

std::vector<PreferencePair> build_preference_pairs(std::span<const TuneExample> target,
                                                   std::span<const TuneExample> opposing,
                                                   PairingStats* stats) {
  std::map<std::pair<std::string, int>, const TuneExample*> index;
  for (const auto& ex : opposing) index.emplace(std::make_pair(ex.question, ex.sample_index), &ex);

  PairingStats local;
  std::vector<PreferencePair> pairs;
  pairs.reserve(target.size());
  for (const auto& ex : target) {
    const auto it = index.find({ex.question, ex.sample_index});
    if (it == index.end()) {
      ++local.missing;
      continue;
    }
    ++local.matched;
    if (ex.response == it->second->response) {
      ++local.identical;
      continue;
    }
    pairs.push_back({ex.question, ex.response, it->second->response, ex.sample_index});
  }
  if (local.matched == 0)
    throw DisjointQuestionSets("no (question, sample) slot is shared by the two datasets");
  if (stats != nullptr) *stats = local;
  return pairs;
}

std::string sft_jsonl(std::span<const TuneExample> examples) {
  std::vector<const TuneExample*> ordered;
  ordered.reserve(examples.size());
  for (const auto& ex : examples) ordered.push_back(&ex);
  std::stable_sort(ordered.begin(), ordered.end(), [](const TuneExample* a, const TuneExample* b) {
    return std::tie(a->question_index, a->sample_index) < std::tie(b->question_index, b->sample_index);
  });
  std::string out;
  for (const auto* ex : ordered) {
    ordered_json j;
    j["question"] = ex->question;
    j["response"] = ex->response;
    j["party"] = to_string(ex->party);
    j["sample_index"] = ex->sample_index;
    j["text"] = render_training_text(ex->question, ex->response);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void export_sft(const std::filesystem::path& path, std::span<const TuneExample> examples) {
  write_file_atomic(path, sft_jsonl(examples));
}

std::vector<TuneExample> read_sft(const std::filesystem::path& path) {
  std::vector<TuneExample> out;
  std::map<std::string, int> question_index;
  for (const auto& line : read_lines(path)) {
    try {
      const auto j = json::parse(line);
      TuneExample ex;
      ex.question = j.at("question").get<std::string>();
      ex.response = j.at("response").get<std::string>();
      const auto party = party_from_string(j.at("party").get<std::string>());
      if (!party || *party == Party::Default) throw ConfigError("SFT rows need a partisan party");
      ex.party = *party;
      ex.sample_index = j.value("sample_index", 0);
      const auto [it, inserted] = question_index.emplace(ex.question, static_cast<int>(question_index.size()));
      ex.question_index = it->second;
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return out;
}

void export_dpo(const std::filesystem::path& path, std::span<const PreferencePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    ordered_json j;
    j["prompt"] = p.prompt;
    j["chosen"] = p.chosen;
    j["rejected"] = p.rejected;
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<PreferencePair> read_dpo(const std::filesystem::path& path) {
  std::vector<PreferencePair> out;
  for (const auto& line : read_lines(path)) {
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("prompt").get<std::string>(), j.at("chosen").get<std::string>(),
                     j.at("rejected").get<std::string>(), 0});
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_questions(const std::filesystem::path& path, const QuestionSet& questions) {
  ordered_json j;
  j["schema_version"] = 1;
  j["seed"] = questions.seed;
  j["expanded"] = questions.expanded;
  j["combined"] = questions.combined();
  write_file_atomic(path, j.dump(2) + "\n");
}

QuestionSet read_questions(const std::filesystem::path& path) {
  try {
    const auto j = json::parse(read_file(path));
    QuestionSet q;
    q.seed = j.at("seed").get<std::vector<std::string>>();
    q.expanded = j.at("expanded").get<std::vector<std::string>>();
    return q;
  } catch (const json::exception& e) {
    throw ConfigError("malformed question file " + path.string() + ": " + e.what());
  }
}

}  // namespace debatelab
