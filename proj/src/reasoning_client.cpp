#include "claimpkg/reasoning_client.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "claimpkg/errors.hpp"
#include "claimpkg/limiter.hpp"

namespace claimpkg {

std::string verdict_wire(Verdict v) {
  return v == Verdict::Supported ? "true" : "false";
}

HttpChatBackend::HttpChatBackend(std::string endpoint, std::string api_key,
                                 ChatParams params)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      params_(std::move(params)) {}

std::string HttpChatBackend::complete(const std::string& prompt) const {
  ConcurrencyLimiter::Guard guard(ConcurrencyLimiter::shared());
  nlohmann::json body{
      {"model", params_.model},
      {"messages", {{{"role", "user"}, {"content", prompt}}}},
      {"temperature", params_.temperature}};
  std::string last_error;
  for (int attempt = 0; attempt < params_.max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(params_.backoff_ms << (attempt - 1)));
    }
    httplib::Client client(endpoint_);
    client.set_read_timeout(params_.timeout_sec, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }
    auto res = client.Post("/v1/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res) {
      last_error = "no response from " + endpoint_;
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("chat response is not JSON: ") +
                          e.what());
    }
    try {
      return parsed.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("unexpected chat response shape: ") +
                          e.what());
    }
  }
  throw TransportError("chat request failed after " +
                       std::to_string(params_.max_attempts) +
                       " attempts: " + last_error);
}

void ScriptedChatBackend::add_response(std::string prompt_substring,
                                       std::string response) {
  responses_.emplace_back(std::move(prompt_substring), std::move(response));
}

void ScriptedChatBackend::set_default(std::string response) {
  default_ = std::move(response);
}

std::string ScriptedChatBackend::complete(const std::string& prompt) const {
  for (const auto& [pattern, response] : responses_) {
    if (prompt.find(pattern) != std::string::npos) return response;
  }
  if (default_) return *default_;
  throw TransportError("scripted chat backend: no response matches prompt");
}

std::string build_reasoning_prompt(const std::string& claim,
                                   const EvidenceSubgraph& evidence) {
  static const std::string kTemplateHead =
      "GENERAL REASONING\n"
      "\n"
      "Task:\n"
      "Verify whether the fact in the given sentence is true or false based "
      "on the provided graph triplets. Use only the information in the "
      "triplets for verification.\n"
      "\n"
      "- The triplets provided represent all relevant knowledge that can be "
      "retrieved.\n"
      "- If the fact is a negation and the triplets do not include the fact, "
      "consider the fact as true.\n"
      "- Ignore questions and verify only the factual assertion within them. "
      "For example, in the question \"When was Daniel Martínez "
      "(politician) a leader of Montevideo?\", focusing on verifying the "
      "assertion \"Daniel Martínez (politician) a leader of "
      "Montevideo\".\n"
      "- Interpret the \"~\" symbol in triplets as indicating a reverse "
      "relationship. For example: \"A ~ south of B\" means \"B is north of "
      "A\".\n"
      "\n"
      "Response Format:\n"
      "Provide your response in the following JSON format without any "
      "additional explanations:\n"
      "{\n"
      "  \"rationale\": \"A concise explanation for your decision\",\n"
      "  \"verdict\": \"true/false as the JSON value\"\n"
      "}\n"
      "\n"
      "Triplets:\n";
  std::string prompt = kTemplateHead;
  prompt += serialize_evidence(evidence);
  prompt += "\nClaim:\n";
  prompt += claim;
  prompt += '\n';
  return prompt;
}

std::string build_fewshot_prompt(const std::string& claim) {
  static const std::string kTemplate =
      "FEWSHOT PSEUDO SUBGRAPH GENERATION\n"
      "\n"
      "Task: Generate a reference graph to verify the following claim. Only "
      "return the subgraphs following the format of provided examples and do "
      "NOT include other unnecessary information.\n"
      "\n"
      "Here are some examples:\n"
      "\n"
      "Claim: Akeem Priestley played for club RoPS and currently plays for "
      "the Orange County Blues FC, which is managed by Oliver Wyss.\n"
      "Subgraphs:\n"
      "<e>Orange County Blues FC</e> || manager || <e>Oliver Wyss</e>\n"
      "<e>Orange County Blues FC</e> || ~clubs || <e>Akeem Priestley</e>\n"
      "<e>Akeem Priestley</e> || team || <e>RoPS</e>\n"
      "\n"
      "Claim: He is a Rhythm and Blues singer from Errata, Mississippi!\n"
      "Subgraphs:\n"
      "<e>Rhythm and blues</e> || ~genre || unknown_0\n"
      "unknown_0 || birth place || <e>Errata, Mississippi</e>\n"
      "unknown_0 || background || unknown_1\n"
      "\n"
      "Claim: Arròs negre is a traditional dish from Spain, and from "
      "the Catalonia region, which is led by the Maria Norrfalk.\n"
      "Subgraphs:\n"
      "<e>Arròs negre</e> || country || <e>Spain</e>\n"
      "<e>Arròs negre</e> || region || <e>Catalonia</e>\n"
      "<e>Catalonia</e> || leader name || <e>Maria Norrfalk</e>\n"
      "\n"
      "Claim: Well, Jason Sherlock did not have a nickname!\n"
      "Subgraphs:\n"
      "<e>Jason Sherlock</e> || nickname || unknown_0\n"
      "\n"
      "Claim: Garlic is the main ingredient of Ajoblanco, which is from "
      "Andalusia.\n"
      "Subgraphs:\n"
      "<e>Ajoblanco</e> || region || <e>Andalusia</e>\n"
      "<e>Ajoblanco</e> || ingredient || <e>Garlic</e>\n"
      "\n"
      "Claim: ";
  return kTemplate + claim + "\nSubgraphs:\n";
}

namespace {

// Removes ``` fence lines, keeping their content intact.
std::string strip_fences(const std::string& raw) {
  std::istringstream in(raw);
  std::string line, out;
  while (std::getline(in, line)) {
    std::string trimmed = line;
    std::size_t start = trimmed.find_first_not_of(" \t");
    if (start != std::string::npos && trimmed.compare(start, 3, "```") == 0) {
      continue;
    }
    out += line;
    out += '\n';
  }
  return out;
}

// Candidate balanced-brace spans, tried in order of appearance.
std::vector<std::string> json_object_spans(const std::string& text) {
  std::vector<std::string> spans;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    int depth = 0;
    bool in_string = false;
    for (std::size_t j = i; j < text.size(); ++j) {
      char c = text[j];
      if (in_string) {
        if (c == '\\') {
          ++j;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          spans.push_back(text.substr(i, j - i + 1));
          break;
        }
      }
    }
  }
  return spans;
}

std::string trim_lower(std::string s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  s = s.substr(a, b - a + 1);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

ParsedVerdict parse_verdict(const std::string& raw) {
  std::string text = strip_fences(raw);
  for (const auto& span : json_object_spans(text)) {
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(span);
    } catch (const nlohmann::json::exception&) {
      continue;
    }
    if (!obj.is_object() || !obj.contains("verdict")) continue;
    std::string value;
    if (obj["verdict"].is_boolean()) {
      value = obj["verdict"].get<bool>() ? "true" : "false";
    } else if (obj["verdict"].is_string()) {
      value = trim_lower(obj["verdict"].get<std::string>());
    }
    ParsedVerdict result;
    if (obj.contains("rationale") && obj["rationale"].is_string()) {
      result.justification = obj["rationale"].get<std::string>();
    }
    if (value == "true") {
      result.verdict = Verdict::Supported;
    } else if (value == "false") {
      result.verdict = Verdict::Refuted;
    } else {
      throw VerdictDomainError("verdict value outside {true,false}: \"" +
                               value + "\"");
    }
    return result;
  }
  throw ParseError("no JSON object with a \"verdict\" key in model output");
}

FewshotResult fewshot_generate_pseudo_subgraphs(const ChatBackend& backend,
                                                const std::string& claim,
                                                const KnowledgeGraph* kg) {
  FewshotResult result;
  std::string completion;
  try {
    completion = backend.complete(build_fewshot_prompt(claim));
  } catch (const std::exception& e) {
    result.diagnostics.push_back(std::string("few-shot call failed: ") +
                                 e.what());
    return result;
  }
  // Blocks of consecutive non-empty lines are candidate subgraphs.
  std::istringstream in(strip_fences(completion));
  std::string line, block;
  std::vector<std::string> blocks;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!block.empty()) blocks.push_back(std::exchange(block, {}));
      continue;
    }
    block += line;
    block += '\n';
  }
  if (!block.empty()) blocks.push_back(block);

  for (const auto& b : blocks) {
    try {
      // No trie guarantee here: parse without KG validation, then report
      // off-lexicon entities separately.
      PseudoSubgraph graph = parse_pseudo_subgraph(b, nullptr);
      if (kg) {
        for (const auto& t : graph.triples) {
          for (const EntityRef* ref : {&t.head, &t.tail}) {
            if (ref->is_known && !kg->has_entity(ref->label)) {
              result.invalid_entities.push_back(ref->label);
            }
          }
        }
      }
      result.graphs.push_back(std::move(graph));
    } catch (const ParseError& e) {
      result.diagnostics.push_back(std::string("unparseable block: ") +
                                   e.what());
    }
  }
  if (result.graphs.empty()) {
    result.diagnostics.push_back("few-shot completion yielded no subgraphs");
  }
  return result;
}

}  // namespace claimpkg
