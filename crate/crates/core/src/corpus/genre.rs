use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Genre {
    Fiction,
    Poetry,
    Drama,
    History,
    Science,
    PhilosophyReligion,
    TravelGeography,
    Biography,
    ChildrensJuvenile,
    SocialScience,
    Other,
}

impl Genre {
    pub const ALL: [Genre; 11] = [
        Genre::Fiction,
        Genre::Poetry,
        Genre::Drama,
        Genre::History,
        Genre::Science,
        Genre::PhilosophyReligion,
        Genre::TravelGeography,
        Genre::Biography,
        Genre::ChildrensJuvenile,
        Genre::SocialScience,
        Genre::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Fiction => "Fiction",
            Genre::Poetry => "Poetry",
            Genre::Drama => "Drama",
            Genre::History => "History",
            Genre::Science => "Science",
            Genre::PhilosophyReligion => "Philosophy/Religion",
            Genre::TravelGeography => "Travel/Geography",
            Genre::Biography => "Biography",
            Genre::ChildrensJuvenile => "Children's/Juvenile",
            Genre::SocialScience => "Social Science",
            Genre::Other => "Other",
        }
    }
}

impl std::fmt::Display for Genre {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Genre {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let key: String = s
            .trim()
            .to_lowercase()
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect();
        Genre::ALL
            .into_iter()
            .find(|g| {
                let canonical: String = g
                    .as_str()
                    .to_lowercase()
                    .chars()
                    .filter(|c| c.is_alphanumeric())
                    .collect();
                canonical == key
            })
            .or(match key.as_str() {
                "childrens" | "juvenile" | "children" => Some(Genre::ChildrensJuvenile),
                "philosophy" | "religion" => Some(Genre::PhilosophyReligion),
                "travel" | "geography" | "travelgeogr" => Some(Genre::TravelGeography),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidRecord(format!("unknown genre {s:?}")))
    }
}

impl TryFrom<String> for Genre {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<Genre> for String {
    fn from(g: Genre) -> String {
        g.as_str().to_string()
    }
}

static RULES: LazyLock<Vec<(Genre, Regex)>> = LazyLock::new(|| {
    [
        (
            Genre::Fiction,
            "fiction|novel|stories|tales|romance|fantasy",
        ),
        (Genre::Poetry, "poetry|poems|verse|sonnet|ballad"),
        (Genre::Drama, "drama|play|theater|comedy|tragedy"),
        (Genre::History, "history|historical|war|battle|military"),
        (
            Genre::Science,
            "science|scientific|natural history|zoolog|botan",
        ),
        (
            Genre::PhilosophyReligion,
            "philosoph|religio|theolog|bible|christian",
        ),
        (Genre::TravelGeography, "travel|voyage|explor|geograph"),
        (
            Genre::Biography,
            "biograph|correspondence|diaries|letters|memoir",
        ),
        (Genre::ChildrensJuvenile, "juvenile|children|fairy tale"),
        (
            Genre::SocialScience,
            "political|economi|social|law|government",
        ),
    ]
    .into_iter()
    .map(|(g, p)| (g, Regex::new(p).expect("static genre pattern")))
    .collect()
});

/// First matching rule over the lower-cased subject headings, in priority order.
pub fn classify_genre<S: AsRef<str>>(subjects: &[S]) -> Genre {
    // the separator cannot occur inside any pattern, so subject order is irrelevant
    let joined = subjects
        .iter()
        .map(|s| s.as_ref().to_lowercase())
        .collect::<Vec<_>>()
        .join(" ; ");
    RULES
        .iter()
        .find(|(_, re)| re.is_match(&joined))
        .map_or(Genre::Other, |(g, _)| *g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priority_order() {
        assert_eq!(classify_genre(&["Science fiction"]), Genre::Fiction);
        assert_eq!(classify_genre(&["Natural history"]), Genre::History);
        assert_eq!(classify_genre::<&str>(&[]), Genre::Other);
        assert_eq!(
            classify_genre(&["Zoology -- Juvenile literature"]),
            Genre::Science
        );
        assert_eq!(classify_genre(&["Fairy tales"]), Genre::Fiction);
        assert_eq!(classify_genre(&["Cookery"]), Genre::Other);
    }

    #[test]
    fn case_and_order_insensitive() {
        let a = ["VOYAGES AND TRAVELS", "Sonnets, English"];
        let b = ["sonnets, english", "Voyages and travels"];
        assert_eq!(classify_genre(&a), Genre::Poetry);
        assert_eq!(classify_genre(&a), classify_genre(&b));
    }

    #[test]
    fn label_round_trip() {
        for g in Genre::ALL {
            assert_eq!(g.as_str().parse::<Genre>().unwrap(), g);
        }
        assert_eq!(
            "Children's".parse::<Genre>().unwrap(),
            Genre::ChildrensJuvenile
        );
        assert!("Cooking".parse::<Genre>().is_err());
    }
}
