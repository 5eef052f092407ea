//! Minimal FDSN dataselect client: one GET against a station/time window,
//! bounded retries on transport failure, raw miniSEED bytes back.

use std::time::Duration;

use chrono::{DateTime, Utc};

use crate::error::SeismicError;

/// Public IRIS dataselect service, used when no endpoint override is given.
pub const DEFAULT_ENDPOINT: &str = "https://service.iris.edu/fdsnws/dataselect/1";

/// Environment variable consulted by [`endpoint_from_env`].
pub const ENDPOINT_ENV_VAR: &str = "RUBBLE_FDSN_ENDPOINT";

const ATTEMPTS: u32 = 3;
const BACKOFF_BASE: Duration = Duration::from_millis(100);
const BODY_LIMIT: u64 = 256 * 1024 * 1024;

/// One dataselect request: which channels of which station, over what window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FdsnQuery {
    pub network: String,
    pub station: String,
    /// Empty means "no location code"; sent as `--` per FDSN convention.
    pub location: String,
    /// Comma-separated channel codes, wildcards allowed (`BH?`, `BH1,BH2,BHZ`).
    pub channel: String,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl FdsnQuery {
    pub fn validate(&self) -> Result<(), SeismicError> {
        if self.start >= self.end {
            return Err(SeismicError::BadQuery(format!(
                "start {} is not before end {}",
                self.start, self.end
            )));
        }
        for (name, value, required) in [
            ("network", &self.network, true),
            ("station", &self.station, true),
            ("location", &self.location, false),
            ("channel", &self.channel, true),
        ] {
            if required && value.is_empty() {
                return Err(SeismicError::BadQuery(format!("{name} code is empty")));
            }
            if !value
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '*' | '?' | ',' | '-' | '_'))
            {
                return Err(SeismicError::BadQuery(format!(
                    "{name} code '{value}' contains characters outside [A-Za-z0-9*?,_-]"
                )));
            }
        }
        Ok(())
    }

    fn url(&self, endpoint: &str) -> String {
        let location = if self.location.is_empty() {
            "--"
        } else {
            &self.location
        };
        format!(
            "{}/query?net={}&sta={}&loc={}&cha={}&starttime={}&endtime={}",
            endpoint.trim_end_matches('/'),
            self.network,
            self.station,
            location,
            self.channel,
            format_time(self.start),
            format_time(self.end),
        )
    }
}

fn format_time(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.6f").to_string()
}

/// Endpoint override from the environment, falling back to the public service.
pub fn endpoint_from_env() -> String {
    std::env::var(ENDPOINT_ENV_VAR).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string())
}

/// Fetch raw miniSEED for `query`. Transport failures are retried with
/// doubling backoff; HTTP errors and empty results are not retried.
pub fn fetch_fdsn(query: &FdsnQuery, endpoint: &str) -> Result<Vec<u8>, SeismicError> {
    query.validate()?;
    let url = query.url(endpoint);
    let mut last_transport = String::new();
    for attempt in 0..ATTEMPTS {
        if attempt > 0 {
            std::thread::sleep(BACKOFF_BASE * 2u32.pow(attempt - 1));
        }
        match ureq::get(&url).call() {
            Ok(mut response) => {
                if response.status().as_u16() == 204 {
                    return Err(SeismicError::NoData);
                }
                let bytes = response
                    .body_mut()
                    .with_config()
                    .limit(BODY_LIMIT)
                    .read_to_vec()
                    .map_err(|e| SeismicError::format("fdsn body", e.to_string()))?;
                if bytes.is_empty() {
                    return Err(SeismicError::NoData);
                }
                return Ok(bytes);
            }
            Err(ureq::Error::StatusCode(code)) => {
                if code == 204 {
                    return Err(SeismicError::NoData);
                }
                return Err(SeismicError::HttpStatus(code));
            }
            Err(other) => last_transport = other.to_string(),
        }
    }
    Err(SeismicError::Transport {
        attempts: ATTEMPTS,
        last: last_transport,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;

    fn query() -> FdsnQuery {
        FdsnQuery {
            network: "IU".into(),
            station: "TEIG".into(),
            location: "00".into(),
            channel: "BH1,BH2,BHZ".into(),
            start: Utc.with_ymd_and_hms(2020, 6, 23, 15, 29, 0).unwrap(),
            end: Utc.with_ymd_and_hms(2020, 6, 23, 15, 35, 0).unwrap(),
        }
    }

    /// One-shot HTTP server; sends `response` and reports the request path.
    fn serve_once(response: &'static str) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = [0u8; 4096];
            let mut request = Vec::new();
            loop {
                let n = stream.read(&mut buf).unwrap();
                request.extend_from_slice(&buf[..n]);
                if n == 0 || request.windows(4).any(|w| w == b"\r\n\r\n") {
                    break;
                }
            }
            let head = String::from_utf8_lossy(&request);
            let path = head.split_whitespace().nth(1).unwrap_or("").to_string();
            tx.send(path).unwrap();
            stream.write_all(response.as_bytes()).unwrap();
        });
        (endpoint, rx)
    }

    #[test]
    fn request_carries_all_six_parameters() {
        let (endpoint, rx) = serve_once(
            "HTTP/1.1 200 OK\r\nContent-Length: 5\r\nConnection: close\r\n\r\nMSEED",
        );
        let bytes = fetch_fdsn(&query(), &endpoint).unwrap();
        assert_eq!(bytes, b"MSEED");
        let path = rx.recv().unwrap();
        assert!(path.starts_with("/query?"), "{path}");
        for needle in [
            "net=IU",
            "sta=TEIG",
            "loc=00",
            "cha=BH1,BH2,BHZ",
            "starttime=2020-06-23T15:29:00.000000",
            "endtime=2020-06-23T15:35:00.000000",
        ] {
            assert!(path.contains(needle), "missing {needle} in {path}");
        }
    }

    #[test]
    fn empty_location_becomes_dashes() {
        let mut q = query();
        q.location = String::new();
        assert!(q.url("http://x").contains("loc=--&"));
    }

    #[test]
    fn no_content_maps_to_no_data() {
        let (endpoint, _rx) =
            serve_once("HTTP/1.1 204 No Content\r\nConnection: close\r\n\r\n");
        match fetch_fdsn(&query(), &endpoint) {
            Err(SeismicError::NoData) => {}
            other => panic!("expected NoData, got {other:?}"),
        }
    }

    #[test]
    fn server_error_maps_to_http_status() {
        let (endpoint, _rx) = serve_once(
            "HTTP/1.1 503 Service Unavailable\r\nContent-Length: 0\r\nConnection: close\r\n\r\n",
        );
        match fetch_fdsn(&query(), &endpoint) {
            Err(SeismicError::HttpStatus(503)) => {}
            other => panic!("expected HttpStatus(503), got {other:?}"),
        }
    }

    #[test]
    fn refused_connection_retries_then_reports_transport() {
        // bind then drop so the port is known-dead
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = format!("http://{}", listener.local_addr().unwrap());
        drop(listener);
        match fetch_fdsn(&query(), &endpoint) {
            Err(SeismicError::Transport { attempts: 3, .. }) => {}
            other => panic!("expected Transport after 3 attempts, got {other:?}"),
        }
    }

    #[test]
    fn inverted_window_fails_before_any_network_use() {
        let mut q = query();
        std::mem::swap(&mut q.start, &mut q.end);
        match fetch_fdsn(&q, "http://127.0.0.1:9") {
            Err(SeismicError::BadQuery(_)) => {}
            other => panic!("expected BadQuery, got {other:?}"),
        }
    }

    #[test]
    fn empty_station_rejected() {
        let mut q = query();
        q.station.clear();
        assert!(matches!(q.validate(), Err(SeismicError::BadQuery(_))));
    }

    #[test]
    fn url_injection_characters_rejected() {
        let mut q = query();
        q.channel = "BHZ&evil=1".into();
        assert!(matches!(q.validate(), Err(SeismicError::BadQuery(_))));
    }
}
