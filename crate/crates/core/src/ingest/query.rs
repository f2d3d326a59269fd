use serde::{Deserialize, Serialize};

use super::IngestError;

pub const PLACEHOLDER: &str = "{company_name}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTemplate {
    pub id: String,
    pub pattern: String,
    #[serde(default = "default_language")]
    pub language_tag: String,
}

fn default_language() -> String {
    "zh".to_string()
}

impl QueryTemplate {
    pub fn new(id: impl Into<String>, pattern: impl Into<String>, language_tag: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            pattern: pattern.into(),
            language_tag: language_tag.into(),
        }
    }

    pub fn render(&self, firm_name: &str) -> String {
        self.pattern.replacen(PLACEHOLDER, firm_name, 1)
    }
}

/// A validated, id-ordered collection of query templates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateSet {
    templates: Vec<QueryTemplate>,
}

impl TemplateSet {
    pub fn new(mut templates: Vec<QueryTemplate>) -> Result<Self, IngestError> {
        if templates.is_empty() {
            return Err(IngestError::InvalidInput("template set is empty".into()));
        }
        for t in &templates {
            let count = t.pattern.matches(PLACEHOLDER).count();
            if count != 1 {
                return Err(IngestError::InvalidInput(format!(
                    "template `{}` must contain exactly one {PLACEHOLDER} placeholder, found {count}",
                    t.id
                )));
            }
            if t.id.trim().is_empty() {
                return Err(IngestError::InvalidInput("template id is empty".into()));
            }
        }
        templates.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = templates.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(IngestError::InvalidInput(format!("duplicate template id `{}`", w[0].id)));
        }
        Ok(Self { templates })
    }

    /// The five default Chinese-language templates: major suppliers, key
    /// customers, partners, buyer supply chain, supply-chain partners.
    pub fn default_zh() -> Self {
        Self::new(vec![
            QueryTemplate::new("q1", "{company_name} 主要供应商", "zh"),
            QueryTemplate::new("q2", "{company_name} 主要客户", "zh"),
            QueryTemplate::new("q3", "{company_name} 合作伙伴", "zh"),
            QueryTemplate::new("q4", "{company_name} 采购方 供应链", "zh"),
            QueryTemplate::new("q5", "{company_name} 供应链合作伙伴", "zh"),
        ])
        .expect("default templates are valid")
    }

    pub fn iter(&self) -> impl Iterator<Item = &QueryTemplate> {
        self.templates.iter()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&QueryTemplate> {
        self.templates.iter().find(|t| t.id == id)
    }
}

/// One query per template, in template id order.
pub fn build_queries(firm_name: &str, templates: &TemplateSet) -> Result<Vec<String>, IngestError> {
    if firm_name.trim().is_empty() {
        return Err(IngestError::InvalidInput("firm name is empty".into()));
    }
    Ok(templates.iter().map(|t| t.render(firm_name)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_templates_produce_five_queries() {
        let qs = build_queries("华为", &TemplateSet::default_zh()).unwrap();
        assert_eq!(qs.len(), 5);
        assert_eq!(qs[0], "华为 主要供应商");
        assert!(qs.iter().all(|q| q.contains("华为")));
    }

    #[test]
    fn identity_template() {
        let set = TemplateSet::new(vec![QueryTemplate::new("only", "{company_name}", "en")]).unwrap();
        assert_eq!(build_queries("X", &set).unwrap(), vec!["X".to_string()]);
    }

    #[test]
    fn latin_firm_name_appears_in_every_query() {
        let qs = build_queries("Firm A", &TemplateSet::default_zh()).unwrap();
        assert_eq!(qs.len(), 5);
        assert!(qs.iter().all(|q| q.contains("Firm A")));
    }

    #[test]
    fn empty_firm_name_is_rejected() {
        assert!(matches!(
            build_queries("  ", &TemplateSet::default_zh()),
            Err(IngestError::InvalidInput(_))
        ));
    }

    #[test]
    fn order_follows_template_ids() {
        let set = TemplateSet::new(vec![
            QueryTemplate::new("b", "{company_name} b", "en"),
            QueryTemplate::new("a", "{company_name} a", "en"),
        ])
        .unwrap();
        assert_eq!(build_queries("F", &set).unwrap(), vec!["F a", "F b"]);
    }

    #[test]
    fn placeholder_count_is_validated() {
        assert!(TemplateSet::new(vec![QueryTemplate::new("a", "no placeholder", "en")]).is_err());
        assert!(TemplateSet::new(vec![QueryTemplate::new(
            "a",
            "{company_name} {company_name}",
            "en"
        )])
        .is_err());
        assert!(TemplateSet::new(vec![
            QueryTemplate::new("a", "{company_name}", "en"),
            QueryTemplate::new("a", "{company_name} x", "en"),
        ])
        .is_err());
        assert!(TemplateSet::new(vec![]).is_err());
    }

    #[test]
    fn substitution_is_verbatim() {
        let set = TemplateSet::new(vec![QueryTemplate::new("a", "{company_name} 客户", "zh")]).unwrap();
        // a firm name that itself looks like a placeholder is not re-expanded
        assert_eq!(build_queries("{company_name}", &set).unwrap(), vec!["{company_name} 客户"]);
    }
}
