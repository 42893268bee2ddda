#pragma once

#include <map>
#include <string>
#include <string_view>

namespace hmo::prompts {

// Initial importance scoring. Placeholders: {{user_persona}}, {{memory_content}}.
extern const std::string_view kImportanceScoring;
// Yes/No answer judge. Placeholders: {{question}}, {{ground_truth}}, {{response}}.
extern const std::string_view kAnswerJudge;
// Sufficiency check after a tier scan. Placeholders: {{query}}, {{memories}}.
extern const std::string_view kSufficiencyCheck;
// Placeholders: {{memory_content}}.
extern const std::string_view kCompression;
// Placeholders: {{user_persona}}, {{memory_content}}.
extern const std::string_view kPersonaRewrite;

/// Replaces every {{name}} with vars.at(name). Unknown placeholders are left
/// as written.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

}  // namespace hmo::prompts
